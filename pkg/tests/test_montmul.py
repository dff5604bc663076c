"""Arithmetic tests: Montgomery setup, all three multiplication variants,
and carry-free digit-vector operations, pinned against the published 16-bit
worked example (a = 28510, b = 38672, m = 36057)."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optomul.errors import UnsupportedModulusError
from optomul.montmul import (digit_add_carry_corrected, digit_convolve,
                             evaluate, from_montgomery, modmul,
                             montgomery_mul_conv, montgomery_mul_exact,
                             montgomery_mul_exact_chain, montgomery_mul_hilo,
                             montgomery_mul_hilo_chain, montgomery_setup,
                             take_high, take_low, to_digits, to_montgomery)

M16 = 36057
A16, B16 = 28510, 38672  # the reference instance; a*b mod m = 23831
ABAR, BBAR = 23411, 31495

K1_VEC = (1, 1, 2, 3, 2, 4, 4, 3, 5, 4, 4, 5, 4, 4, 6, 6, 5, 3, 3,
          4, 3, 2, 3, 2, 1, 1, 2, 2, 1)
K1_HI_VEC = (1, 1, 2, 3, 2, 4, 4, 3, 5, 4, 4, 5, 4, 4, 6, 6, 5, 3, 3)
K1_LO_VEC = (4, 4, 6, 6, 5, 3, 3, 4, 3, 2, 3, 2, 1, 1, 2, 2, 1)
K2_VEC = (4, 8, 10, 12, 15, 16, 16, 19, 22, 17, 17, 22, 19, 20, 25, 32,
          28, 25, 24, 20, 16, 15, 13, 11, 9, 8, 6, 5, 5, 5, 3, 1)
K3_VEC = (32, 28, 25, 24, 20, 16, 15, 13, 11, 9, 8, 6, 5, 5, 5, 3, 1)
K4_VEC = (32, 28, 25, 24, 52, 76, 68, 62, 87, 105, 92, 115, 133, 114, 102,
          121, 100, 86, 79, 66, 51, 43, 37, 30, 23, 19, 14, 9, 6, 5, 3, 1)
K4_HI_VEC = (32, 28, 25, 24, 52, 76, 68, 62, 87, 105, 92, 115, 133, 114,
             102, 121, 100, 86, 79, 66, 51, 43)
K5_HI_VEC = (32, 28, 25, 25, 53, 78, 71, 64, 91, 109, 95, 120, 137, 118,
             107, 126, 104, 92, 85, 71, 54, 46)


class TestSetup:
    def test_reference_modulus(self):
        ctx = montgomery_setup(M16)
        assert (ctx.r, ctx.M, ctx.R) == (131072, 52375, 14408)
        assert ctx.k == 17

    def test_small_modulus_brute_force(self):
        # brute-force oracle: search residues for the inverses
        for m in (3, 5, 7, 9, 255, 36057):
            ctx = montgomery_setup(m)
            assert ctx.r > m
            assert next(x for x in range(ctx.r) if (m * x) % ctx.r == ctx.r - 1) == ctx.M
            assert next(x for x in range(m) if (ctx.r * x) % m == 1) == ctx.R

    def test_even_modulus_rejected(self):
        with pytest.raises(UnsupportedModulusError):
            montgomery_setup(36056)
        with pytest.raises(UnsupportedModulusError):
            montgomery_setup(2)

    def test_domain_round_trip(self):
        ctx = montgomery_setup(M16)
        assert to_montgomery(A16, ctx) == ABAR
        assert to_montgomery(B16, ctx) == BBAR
        assert to_montgomery(0, ctx) == 0
        assert from_montgomery(31036, ctx) == 23831
        assert from_montgomery(1040632, ctx) == 23831


class TestExactVariant:
    def test_reference_chain(self):
        ctx = montgomery_setup(M16)
        chain = montgomery_mul_exact_chain(ABAR, BBAR, ctx)
        assert chain["k1"] == 737329445
        assert chain["k2"] == 38617629681875
        assert chain["k3"] == 92371
        assert chain["k4"] == 3330621147
        assert chain["k5"] == 4067950592
        assert chain["cbar"] == 31036
        assert from_montgomery(chain["cbar"], ctx) == 23831

    def test_zero_operand(self):
        ctx = montgomery_setup(M16)
        assert montgomery_mul_exact(0, ABAR, ctx) == 0

    def test_random_against_modular_oracle(self):
        rng = random.Random(101)
        ctx = montgomery_setup(M16)
        for _ in range(1000):
            x, y = rng.randrange(ctx.m), rng.randrange(ctx.m)
            got = montgomery_mul_exact(x, y, ctx)
            assert got == (x * y * ctx.R) % ctx.m


class TestHiloVariant:
    def test_reference_chain(self):
        ctx = montgomery_setup(M16)
        chain = montgomery_mul_hilo_chain(ABAR, BBAR, ctx)
        # k1 mod 2^17; consistent with k2 = k1_lo * M below
        assert chain["k1_lo"] == 49445
        assert chain["k1_hi"] == 22501
        assert chain["k2"] == 2589681875
        assert chain["k3"] == 92371
        assert chain["k4_hi"] == 101642
        assert chain["k5_hi"] == 124144
        assert chain["cbar"] == 31036

    def test_zero_operands(self):
        ctx = montgomery_setup(M16)
        assert from_montgomery(montgomery_mul_hilo(0, 0, ctx), ctx) == 0

    def test_matches_exact_on_random_16bit(self):
        rng = random.Random(77)
        for _ in range(2000):
            m = rng.randrange(3, 1 << 16) | 1
            ctx = montgomery_setup(m)
            a, b = rng.randrange(m), rng.randrange(m)
            ab, bb = to_montgomery(a, ctx), to_montgomery(b, ctx)
            assert montgomery_mul_hilo(ab, bb, ctx) == montgomery_mul_exact(ab, bb, ctx)
            assert from_montgomery(montgomery_mul_hilo(ab, bb, ctx), ctx) == (a * b) % m


class TestDigitVectors:
    def test_to_digits_round_trip(self):
        assert to_digits(5) == (1, 0, 1)
        assert to_digits(0) == (0,)
        assert evaluate((1, 2, 1)) == 9
        for x in (0, 1, 2, 255, 36057, 737329445):
            assert evaluate(to_digits(x)) == x
        with pytest.raises(ValueError):
            to_digits(-1)

    def test_convolve_small(self):
        assert digit_convolve((1, 1), (1, 1)) == (1, 2, 1)

    def test_reference_k1(self):
        k1 = digit_convolve(to_digits(ABAR), to_digits(BBAR))
        assert k1 == K1_VEC
        assert evaluate(k1) == 737329445

    def test_reference_k4(self):
        k4 = digit_convolve(K3_VEC, to_digits(M16))
        assert len(k4) == 32
        assert k4 == K4_VEC
        assert evaluate(k4) == 135660388059

    def test_take_windows(self):
        assert take_low(K1_VEC, 17) == K1_LO_VEC
        assert evaluate(take_low(K1_VEC, 17)) == 573733
        assert take_high(K1_VEC, 17, 6) == K1_HI_VEC
        assert evaluate(take_high(K1_VEC, 17, 6)) == 720045
        assert take_high(K4_VEC, 17, 6) == K4_HI_VEC
        assert evaluate(take_high(K4_VEC, 17, 6)) == 132480817
        # windows beyond the vector return it whole
        assert take_low((1, 0), 17) == (1, 0)
        assert take_high((1, 0), 17, 20) == (1, 0)

    def test_carry_corrected_add(self):
        out = digit_add_carry_corrected(K1_HI_VEC, K4_HI_VEC, 6)
        assert out == K5_HI_VEC
        assert evaluate(out) == 133200926
        assert evaluate(out) == 720045 + 132480817 + 64
        assert digit_add_carry_corrected((0,), (0,), 0) == (1,)

    @given(st.integers(0, 1 << 20), st.integers(0, 1 << 20))
    def test_convolution_is_multiplication(self, x, y):
        assert evaluate(digit_convolve(to_digits(x), to_digits(y))) == x * y

    @given(st.lists(st.integers(0, 9), min_size=1, max_size=8),
           st.lists(st.integers(0, 9), min_size=1, max_size=8))
    def test_convolution_commutes(self, xs, ys):
        x, y = tuple(xs), tuple(ys)
        assert digit_convolve(x, y) == digit_convolve(y, x)

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=12),
           st.lists(st.integers(0, 50), min_size=1, max_size=12),
           st.integers(0, 10))
    def test_carry_corrected_evaluation_identity(self, us, vs, overlap):
        u, v = tuple(us), tuple(vs)
        out = digit_add_carry_corrected(u, v, overlap)
        assert evaluate(out) == evaluate(u) + evaluate(v) + (1 << overlap)


class TestConvVariant:
    def test_reference_trace(self):
        ctx = montgomery_setup(M16)
        cbar, trace = montgomery_mul_conv(ABAR, BBAR, ctx, overlap=6)
        assert trace.k1 == K1_VEC
        assert trace.k1_hi == K1_HI_VEC
        assert trace.k1_lo == K1_LO_VEC
        assert trace.k2 == K2_VEC
        assert trace.k3 == K3_VEC
        assert trace.k4 == K4_VEC
        assert trace.k4_hi == K4_HI_VEC
        assert trace.k5_hi == K5_HI_VEC
        evals = trace.evaluations()
        assert evals["k1"] == 737329445
        assert evals["k1_hi"] == 720045
        assert evals["k1_lo"] == 573733
        assert evals["k2"] == 30049265875
        assert evals["k3"] == 3762387
        assert evals["k4"] == 135660388059
        assert evals["k4_hi"] == 132480817
        assert evals["k5_hi"] == 133200926
        assert cbar == 1040632
        assert from_montgomery(cbar, ctx) == 23831

    def test_zero_operands(self):
        ctx = montgomery_setup(M16)
        cbar, trace = montgomery_mul_conv(0, 0, ctx, overlap=6)
        assert cbar == 0
        assert all(v == 0 for v in trace.k1)

    def test_trace_report_round_trips_values(self):
        ctx = montgomery_setup(M16)
        _, trace = montgomery_mul_conv(ABAR, BBAR, ctx)
        text = trace.report()
        assert "-> 737329445" in text
        assert "cbar = 1040632" in text

    def test_max_digit_within_dynamic_range(self):
        # 12 stops of dynamic range bound the largest representable digit
        rng = random.Random(5)
        for _ in range(200):
            m = rng.randrange(3, 1 << 16) | 1
            ctx = montgomery_setup(m)
            a, b = rng.randrange(m), rng.randrange(m)
            _, trace = montgomery_mul_conv(to_montgomery(a, ctx),
                                           to_montgomery(b, ctx), ctx)
            peak = max(max(trace.k1), max(trace.k2), max(trace.k4),
                       max(trace.k5_hi))
            assert peak <= 1 << 12

    def test_modmul_all_variants(self):
        assert modmul(A16, B16, M16, "exact") == 23831
        assert modmul(A16, B16, M16, "hilo") == 23831
        assert modmul(A16, B16, M16, "conv") == 23831
        assert modmul(11, 13, 9, "conv") == (11 * 13) % 9
