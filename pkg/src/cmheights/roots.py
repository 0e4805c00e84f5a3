"""Certified isolation of the complex roots of a squarefree integer polynomial.

Strategy: Durand-Kerner iteration at working precision produces approximate
roots; each approximation z is then certified with ball arithmetic through
the classical inclusion bound

    there is a root within distance  deg(p) * |p(z)| / |p'(z)|  of z,

(proof: if all roots were farther than R away, |p'/p|(z) = |sum 1/(z-r_i)|
< deg/R would contradict R = deg*|p/p'|).  When the resulting deg(p) boxes
are pairwise disjoint, each contains exactly one root.  Failure to certify
at the current precision triggers the standard doubling-precision retry.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .intervals import ComplexBall, PrecisionExhausted, RealInterval, MAX_PRECISION
from .polynomials import IntPoly, is_squarefree


def _eval_mpc(coeffs, z, ctx):
    acc = mpc(0, precision=ctx.precision)
    for c in reversed(coeffs):
        acc = ctx.add(ctx.mul(acc, z), c)
    return acc


def _root_bound_exp(p: IntPoly) -> int:
    """k with all roots of p inside |z| < 2^k (Cauchy bound via bit lengths)."""
    lead_bits = abs(p.leading()).bit_length()
    worst = max((abs(c).bit_length() for c in p.coeffs[:-1]), default=0)
    return max(worst - lead_bits + 2, 2)


def _durand_kerner(p: IntPoly, prec: int, seeds=None):
    ctx = gmpy2.context(precision=prec)
    n = p.degree
    coeffs = [gmpy2.mpz(c) for c in p.coeffs]
    lead = coeffs[-1]
    k = _root_bound_exp(p)
    if seeds is None:
        base = mpc(mpfr("0.4", prec), mpfr("0.9", prec), precision=prec)
        r = ctx.mul_2exp(mpfr(1, prec), k - 1)
        seeds = []
        w = mpc(1, precision=prec)
        for _ in range(n):
            w = ctx.mul(w, base)
            seeds.append(ctx.mul(w, r))
    zs = list(seeds)
    # relative movement threshold (roots may be huge or tiny)
    for _ in range(64 + 8 * n):
        converged = True
        for i in range(n):
            num = _eval_mpc(coeffs, zs[i], ctx)
            den = ctx.mul(mpc(1, precision=prec), lead)
            for j in range(n):
                if j != i:
                    den = ctx.mul(den, ctx.sub(zs[i], zs[j]))
            if den == 0:
                zs[i] = ctx.add(zs[i], mpc(mpfr(1, prec), mpfr(1, prec), precision=prec))
                converged = False
                continue
            delta = ctx.div(num, den)
            zs[i] = ctx.sub(zs[i], delta)
            scale = max(abs(zs[i]), mpfr(1, prec))
            if abs(delta) > ctx.mul(scale, gmpy2.exp2(-prec + 6)):
                converged = False
        if converged:
            break
    return zs


def _newton_polish(coeffs_d, z, ctx, rounds=4):
    for _ in range(rounds):
        num = _eval_mpc(coeffs_d[0], z, ctx)
        den = _eval_mpc(coeffs_d[1], z, ctx)
        if den == 0:
            return z
        z = ctx.sub(z, ctx.div(num, den))
    return z


def _certify(p: IntPoly, zs, prec, target: Fraction):
    """Return list of ComplexBalls if every root certifies, else None."""
    n = p.degree
    dp = p.derivative()
    balls = []
    for z in zs:
        center = ComplexBall(RealInterval.exact(z.real, prec),
                             RealInterval.exact(z.imag, prec))
        val = _eval_ball(p.coeffs, center, prec)
        der = _eval_ball(dp.coeffs, center, prec)
        der_abs = der.abs(prec)
        if der_abs.lo <= 0:
            return None
        radius = val.abs(prec).div(der_abs, prec).mul(Fraction(n), prec)
        r_hi = radius.hi
        if not gmpy2.is_finite(r_hi):
            return None
        pad = RealInterval(-r_hi, r_hi)
        ball = ComplexBall(center.re.add(pad, prec), center.im.add(pad, prec))
        if not (ball.re.radius_leq(target) and ball.im.radius_leq(target)):
            return None
        balls.append(ball)
    for i in range(n):
        for j in range(i + 1, n):
            if not balls[i].is_disjoint(balls[j]):
                return None
    return balls


def _eval_ball(coeffs, z: ComplexBall, prec):
    acc = ComplexBall.exact(0, 0, prec)
    for c in reversed(coeffs):
        acc = acc.mul(z, prec).add(ComplexBall.exact(c, 0, prec), prec)
    return acc


def isolate_complex_roots(p: IntPoly, target_radius) -> list[ComplexBall]:
    """deg(p) pairwise-disjoint boxes, one root each, half-width <= target.

    Requires a squarefree input of degree >= 1 (raises ValueError
    "repeated roots" otherwise) and a positive target radius.
    """
    target = Fraction(target_radius)
    if target <= 0:
        raise ValueError("target radius must be positive")
    if p.is_zero() or p.degree < 1:
        raise ValueError("degree must be at least 1")
    if not is_squarefree(p):
        raise ValueError("repeated roots")

    if p.degree == 1:
        c0, c1 = p.coeffs
        root = Fraction(-c0, c1)
        prec = 64
        while True:
            ball = ComplexBall(RealInterval.exact(root, prec), RealInterval.zero())
            if ball.re.radius_leq(target):
                return [ball]
            prec *= 2
            if prec > MAX_PRECISION:
                raise PrecisionExhausted("root isolation: linear case")

    prec = max(64, 2 * target.denominator.bit_length() -
               2 * target.numerator.bit_length() + 32)
    zs = None
    coeffs_d = ([gmpy2.mpz(c) for c in p.coeffs],
                [gmpy2.mpz(c) for c in p.derivative().coeffs])
    while prec <= MAX_PRECISION:
        ctx = gmpy2.context(precision=prec)
        if zs is None:
            zs = _durand_kerner(p, prec)
        else:
            zs = [mpc(z, precision=prec) for z in zs]
            zs = [_newton_polish(coeffs_d, z, ctx, rounds=6) for z in zs]
        balls = _certify(p, zs, prec, target)
        if balls is not None:
            return balls
        # one extra Durand-Kerner sweep helps separate near-collisions
        zs = _durand_kerner(p, prec * 2, seeds=[mpc(z, precision=prec * 2) for z in zs])
        prec *= 2
    raise PrecisionExhausted("root isolation did not certify below MAX_PRECISION")
