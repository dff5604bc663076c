"""Montgomery modular multiplication: exact, high/low split, and carry-free
convolutional variants over digit vectors.

Digit vectors are tuples of non-negative ints, most significant digit first.
Digits may exceed 1: convolution performs no carries, so a "binary" vector can
hold values like (1, 2, 1) = 9.
"""

from dataclasses import dataclass, fields

from .errors import UnsupportedModulusError

DigitVector = tuple  # tuple[int, ...], MSB first


# ---------------------------------------------------------------------------
# digit-vector primitives
# ---------------------------------------------------------------------------

def to_digits(x: int) -> DigitVector:
    """Binary expansion of x, MSB first. to_digits(5) == (1, 0, 1)."""
    if x < 0:
        raise ValueError(f"cannot expand negative value {x}")
    if x == 0:
        return (0,)
    out = []
    while x:
        out.append(x & 1)
        x >>= 1
    return tuple(reversed(out))


def evaluate(v: DigitVector) -> int:
    """Value of a digit vector under base-2 positional weights (carries resolved)."""
    total = 0
    for d in v:
        total = 2 * total + d
    return total


def digit_convolve(x: DigitVector, y: DigitVector) -> DigitVector:
    """Carry-free product: out[j] = sum_i x[i] * y[j-i].

    The result has len(x) + len(y) - 1 digits and evaluates to
    evaluate(x) * evaluate(y); individual digits may exceed the base.
    """
    if not x or not y:
        raise ValueError("operands must be non-empty")
    out = [0] * (len(x) + len(y) - 1)
    for i, xi in enumerate(x):
        if xi == 0:
            continue
        for j, yj in enumerate(y):
            out[i + j] += xi * yj
    return tuple(out)


def take_low(v: DigitVector, k: int) -> DigitVector:
    """Keep the k least significant digits (weights < 2^k)."""
    if k >= len(v):
        return tuple(v)
    return tuple(v[len(v) - k:])


def take_high(v: DigitVector, k: int, overlap: int) -> DigitVector:
    """Drop the k - overlap - 1 least significant digits.

    Keeps every digit of weight >= 2^(k - overlap - 1); the result shares
    overlap + 1 digits with take_low(v, k), which absorb the carries that were
    never propagated out of the discarded low digits.
    """
    if overlap < 0:
        raise ValueError("overlap must be >= 0")
    drop = k - overlap - 1
    if drop <= 0 or drop >= len(v):
        return tuple(v)
    return tuple(v[:len(v) - drop])


def digit_add_carry_corrected(u: DigitVector, v: DigitVector, overlap: int) -> DigitVector:
    """LSB-aligned digit sum plus a 1 at weight 2^overlap.

    The injected 1 stands in for the carry that the discarded low digits would
    have produced; evaluate(out) == evaluate(u) + evaluate(v) + 2**overlap.
    """
    n = max(len(u), len(v), overlap + 1)
    out = [0] * n
    for i, d in enumerate(reversed(u)):
        out[n - 1 - i] += d
    for i, d in enumerate(reversed(v)):
        out[n - 1 - i] += d
    out[n - 1 - overlap] += 1
    return tuple(out)


# ---------------------------------------------------------------------------
# Montgomery context
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MontgomeryContext:
    """Precomputed constants for modulus m: r = 2^k, M = -m^-1 mod r, R = r^-1 mod m."""

    m: int
    k: int
    r: int
    M: int
    R: int

    def __post_init__(self):
        assert self.m % 2 == 1
        assert self.r == 1 << self.k
        assert (self.m * self.M) % self.r == self.r - 1
        assert (self.r * self.R) % self.m == 1


def montgomery_setup(m: int) -> MontgomeryContext:
    """Derive (k, r, M, R) for an odd modulus m >= 3.

    r = 2^k uses one bit more than the width of m, so every 16-bit modulus gets
    r = 2^17; division and remainder by r reduce to shifts and masks.
    """
    if m < 3 or m % 2 == 0:
        raise UnsupportedModulusError(f"modulus must be odd and >= 3, got {m}")
    k = m.bit_length() + 1
    r = 1 << k
    M = (-pow(m, -1, r)) % r
    R = pow(r, -1, m)
    return MontgomeryContext(m=m, k=k, r=r, M=M, R=R)


def to_montgomery(a: int, ctx: MontgomeryContext) -> int:
    if a < 0:
        raise ValueError("operand must be non-negative")
    return (a * ctx.r) % ctx.m


def from_montgomery(cbar: int, ctx: MontgomeryContext) -> int:
    return (cbar * ctx.R) % ctx.m


# ---------------------------------------------------------------------------
# multiplication variants
# ---------------------------------------------------------------------------

def montgomery_mul_exact(abar: int, bbar: int, ctx: MontgomeryContext) -> int:
    """c̄ = (ā·b̄ + (ā·b̄·M mod r)·m) / r, reduced into [0, m)."""
    k1 = abar * bbar
    k3 = (k1 * ctx.M) % ctx.r
    k4 = k3 * ctx.m
    cbar = (k1 + k4) >> ctx.k
    if cbar >= ctx.m:
        cbar -= ctx.m
    return cbar


def montgomery_mul_exact_chain(abar: int, bbar: int, ctx: MontgomeryContext) -> dict:
    """The exact variant, returning every intermediate (for reports and tests)."""
    k1 = abar * bbar
    k2 = k1 * ctx.M
    k3 = k2 % ctx.r
    k4 = k3 * ctx.m
    k5 = k1 + k4
    cbar = k5 >> ctx.k
    reduced = cbar - ctx.m if cbar >= ctx.m else cbar
    return {"k1": k1, "k2": k2, "k3": k3, "k4": k4, "k5": k5,
            "cbar": cbar, "cbar_reduced": reduced}


def montgomery_mul_hilo(abar: int, bbar: int, ctx: MontgomeryContext) -> int:
    """Shift-based variant that keeps two extra overlap bits through the split.

    k1 is split at k-2 bits; the +1 in the high sum sets the carry that the
    discarded low bits would have generated. Agrees with the exact variant.
    """
    cbar = montgomery_mul_hilo_chain(abar, bbar, ctx)["cbar"]
    if cbar >= ctx.m:
        cbar -= ctx.m
    return cbar


def montgomery_mul_hilo_chain(abar: int, bbar: int, ctx: MontgomeryContext) -> dict:
    k = ctx.k
    k1 = abar * bbar
    k1_lo = k1 & (ctx.r - 1)
    k1_hi = k1 >> (k - 2)
    k2 = k1_lo * ctx.M
    k3 = k2 & (ctx.r - 1)
    k4 = k3 * ctx.m
    k4_hi = k4 >> (k - 2)
    k5_hi = k1_hi + k4_hi + 1
    cbar = k5_hi >> 2
    return {"k1": k1, "k1_lo": k1_lo, "k1_hi": k1_hi, "k2": k2, "k3": k3,
            "k4": k4, "k4_hi": k4_hi, "k5_hi": k5_hi, "cbar": cbar}


@dataclass(frozen=True)
class ConvTrace:
    """Every intermediate of the convolutional variant, as digit vectors."""

    abar: DigitVector
    bbar: DigitVector
    m_digits: DigitVector
    M_digits: DigitVector
    k1: DigitVector
    k1_hi: DigitVector
    k1_lo: DigitVector
    k2: DigitVector
    k3: DigitVector
    k4: DigitVector
    k4_hi: DigitVector
    k5_hi: DigitVector
    overlap: int
    cbar: int

    def evaluations(self) -> dict:
        return {f.name: evaluate(getattr(self, f.name))
                for f in fields(self) if f.name not in ("overlap", "cbar")}

    def report(self) -> str:
        """Line-oriented dump of the whole chain for diffing."""
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name in ("overlap", "cbar"):
                lines.append(f"{f.name} = {val}")
            else:
                digits = ",".join(str(d) for d in val)
                lines.append(f"{f.name} = ({digits}) -> {evaluate(val)}")
        return "\n".join(lines)


def montgomery_mul_conv(abar: int, bbar: int, ctx: MontgomeryContext,
                        overlap: int = 6) -> tuple[int, ConvTrace]:
    """Carry-free convolutional Montgomery multiply.

    All multiplies are digit convolutions and all shifts/masks are digit-window
    selections, so the chain maps directly onto optical transforms and masks.
    The result is exact only modulo m: c̄ may carry a multiple-of-m offset,
    removed by from_montgomery. overlap counts the extra low digits retained to
    absorb unpropagated carries; 6 suffices empirically for 16-bit operands.
    Values beyond k - 1 are clamped (the split cannot retain more digits than
    the reduction window holds).
    """
    if overlap < 1:
        raise ValueError("overlap must be >= 1")
    overlap = min(overlap, ctx.k - 1)
    k = ctx.k
    abar_d = to_digits(abar)
    bbar_d = to_digits(bbar)
    m_d = to_digits(ctx.m)
    M_d = to_digits(ctx.M)

    k1 = digit_convolve(abar_d, bbar_d)
    k1_hi = take_high(k1, k, overlap)
    k1_lo = take_low(k1, k)
    k2 = digit_convolve(k1_lo, M_d)
    k3 = take_low(k2, k)
    k4 = digit_convolve(k3, m_d)
    k4_hi = take_high(k4, k, overlap)
    k5_hi = digit_add_carry_corrected(k1_hi, k4_hi, overlap)
    # one more digit than the bit variant falls below the split: convolution
    # output is one digit shorter than the equivalent multiplication's
    cbar = evaluate(k5_hi) >> (overlap + 1)

    trace = ConvTrace(abar=abar_d, bbar=bbar_d, m_digits=m_d, M_digits=M_d,
                      k1=k1, k1_hi=k1_hi, k1_lo=k1_lo, k2=k2, k3=k3, k4=k4,
                      k4_hi=k4_hi, k5_hi=k5_hi, overlap=overlap, cbar=cbar)
    return cbar, trace


def modmul(a: int, b: int, m: int, variant: str = "exact", overlap: int = 6) -> int:
    """a*b mod m through the Montgomery domain, using the selected variant."""
    ctx = montgomery_setup(m)
    abar = to_montgomery(a, ctx)
    bbar = to_montgomery(b, ctx)
    if variant == "exact":
        cbar = montgomery_mul_exact(abar, bbar, ctx)
    elif variant == "hilo":
        cbar = montgomery_mul_hilo(abar, bbar, ctx)
    elif variant == "conv":
        cbar, _ = montgomery_mul_conv(abar, bbar, ctx, overlap=overlap)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return from_montgomery(cbar, ctx)
