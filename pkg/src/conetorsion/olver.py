"""Exact-rational polynomials for the uniform large-order Bessel expansions.

Everything here is built over ``fractions.Fraction``; floating point enters
only when a polynomial is evaluated.  The module provides

* ``olver_pair(r)``: the coefficient polynomials u_r(t), v_r(t) of the
  large-order (Debye/Olver) expansions of I_nu and K_nu and their
  derivatives (DLMF 10.41.4, 10.41.9),
* ``d_poly(r)``: D_r(t), the order-r coefficient of the formal logarithm of
  the u-series,
* ``m_poly(r)``: M_r(t, a), the order-r coefficient of the formal logarithm
  of the derivative-series with shift parameter a; its coefficient table
  z_{r,b}(a) is exposed through ``z_table``,
* ``z_diff_sum(r, a)``: the closed-form sum of z_{r,b}(-a) - z_{r,b}(a).

Key structural facts (asserted in the test suite): D_r and M_r contain only
the powers t^(r+2b) with 0 <= b <= r, each z_{r,b} is a polynomial in the
shift of degree <= r, and M_r(1, a) = D_r(1) - (-a)^r / r.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Dict, Tuple

DEFAULT_MAX_ORDER = 12

# A polynomial in t is a dict {t-exponent: Fraction}.
TPoly = Dict[int, Fraction]
# A polynomial in (t, a) is a dict {t-exponent: {a-exponent: Fraction}}.
TAPoly = Dict[int, Dict[int, Fraction]]

_lock = threading.Lock()
_u_cache: list[TPoly] = []
_v_cache: list[TPoly] = []
_d_cache: dict[int, TPoly] = {}
_m_cache: dict[int, TAPoly] = {}


def _tp_add(p: TPoly, q: TPoly) -> TPoly:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, Fraction(0)) + c
    return {e: c for e, c in out.items() if c}


def _tp_scale(p: TPoly, c: Fraction) -> TPoly:
    return {e: v * c for e, v in p.items() if v * c}


def _tp_mul(p: TPoly, q: TPoly) -> TPoly:
    out: TPoly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = e1 + e2
            out[e] = out.get(e, Fraction(0)) + c1 * c2
    return {e: c for e, c in out.items() if c}


def _tp_diff(p: TPoly) -> TPoly:
    return {e - 1: c * e for e, c in p.items() if e != 0}


def _tp_integrate(p: TPoly) -> TPoly:
    # Antiderivative with zero constant term, matching the standard
    # normalization u_r(0) = 0 for r >= 1.
    return {e + 1: c / (e + 1) for e, c in p.items()}


def _extend_uv(order: int) -> None:
    if not _u_cache:
        _u_cache.append({0: Fraction(1)})
        _v_cache.append({0: Fraction(1)})
    one_minus_t2 = {0: Fraction(1), 2: Fraction(-1)}
    while len(_u_cache) <= order:
        u = _u_cache[-1]
        du = _tp_diff(u)
        # u_{r+1} = t^2 (1 - t^2) u_r' / 2 + (1/8) int_0^t (1 - 5 s^2) u_r ds
        term1 = _tp_scale(_tp_mul({2: Fraction(1)}, _tp_mul(one_minus_t2, du)), Fraction(1, 2))
        term2 = _tp_scale(_tp_integrate(_tp_mul({0: Fraction(1), 2: Fraction(-5)}, u)), Fraction(1, 8))
        unext = _tp_add(term1, term2)
        # v_{r+1} = u_{r+1} - t (1 - t^2) u_r / 2 - t^2 (1 - t^2) u_r'
        vnext = _tp_add(
            unext,
            _tp_add(
                _tp_scale(_tp_mul({1: Fraction(1)}, _tp_mul(one_minus_t2, u)), Fraction(-1, 2)),
                _tp_scale(_tp_mul({2: Fraction(1)}, _tp_mul(one_minus_t2, du)), Fraction(-1)),
            ),
        )
        _u_cache.append(unext)
        _v_cache.append(vnext)


def _check_order(r: int, max_order: int) -> None:
    if r > max_order:
        raise ValueError(f"order {r} exceeds the configured maximum {max_order}")


def olver_pair(r: int, max_order: int = DEFAULT_MAX_ORDER) -> Tuple[TPoly, TPoly]:
    """Return (u_r, v_r) as exact-rational polynomials in t."""
    if r < 0:
        raise ValueError("order must be >= 0")
    _check_order(r, max_order)
    with _lock:
        _extend_uv(r)
        return dict(_u_cache[r]), dict(_v_cache[r])


def _series_log(coeffs: list, order: int, mul, scale, add):
    """Order coefficients of log(1 + sum_{r>=1} w_r x^r), truncated at x^order.

    ``coeffs[r]`` is w_r (``coeffs[0]`` unused); the coefficient ring is
    abstracted through ``mul``/``scale``/``add`` so t- and (t,a)-polynomials
    share the code.  Uses log(1+S) = sum (-1)^(j+1) S^j / j.
    """
    out = [None] + [dict() for _ in range(order)]
    power = [None] + [coeffs[r] for r in range(1, order + 1)]  # S^1 truncated
    sign = Fraction(1)
    for j in range(1, order + 1):
        for r in range(j, order + 1):
            out[r] = add(out[r], scale(power[r], sign / j))
        if j == order:
            break
        sign = -sign
        # power <- power * S, truncated
        new = [None] + [dict() for _ in range(order)]
        for r1 in range(j, order + 1):
            for r2 in range(1, order - r1 + 1):
                new[r1 + r2] = add(new[r1 + r2], mul(power[r1], coeffs[r2]))
        power = new
    return out


def d_poly(r: int, max_order: int = DEFAULT_MAX_ORDER) -> TPoly:
    """Return D_r(t), the order-r coefficient of log of the u-series."""
    if r < 1:
        raise ValueError("order must be >= 1")
    _check_order(r, max_order)
    with _lock:
        if r not in _d_cache:
            _extend_uv(max(r, len(_u_cache) - 1))
            us = [None] + [_u_cache[j] for j in range(1, r + 1)]
            logs = _series_log(us, r, _tp_mul, _tp_scale, _tp_add)
            for j in range(1, r + 1):
                _d_cache.setdefault(j, logs[j])
        return dict(_d_cache[r])


def _tap_add(p: TAPoly, q: TAPoly) -> TAPoly:
    out = {e: dict(ap) for e, ap in p.items()}
    for e, ap in q.items():
        tgt = out.setdefault(e, {})
        for d, c in ap.items():
            tgt[d] = tgt.get(d, Fraction(0)) + c
    return {e: {d: c for d, c in ap.items() if c} for e, ap in out.items()}


def _tap_scale(p: TAPoly, c: Fraction) -> TAPoly:
    return {e: {d: v * c for d, v in ap.items() if v * c} for e, ap in p.items()}


def _tap_mul(p: TAPoly, q: TAPoly) -> TAPoly:
    out: TAPoly = {}
    for e1, ap1 in p.items():
        for e2, ap2 in q.items():
            tgt = out.setdefault(e1 + e2, {})
            for d1, c1 in ap1.items():
                for d2, c2 in ap2.items():
                    d = d1 + d2
                    tgt[d] = tgt.get(d, Fraction(0)) + c1 * c2
    return out


def _clean_tap(p: TAPoly) -> TAPoly:
    return {e: ap for e, ap in ((e, {d: c for d, c in ap.items() if c}) for e, ap in p.items()) if ap}


def m_poly(r: int, max_order: int = DEFAULT_MAX_ORDER) -> TAPoly:
    """Return M_r(t, a) as {t-exponent: {a-exponent: Fraction}}.

    M_r is the order-r coefficient of the formal log of the combined series
    (1 + sum v_j x^j) + a t x (1 + sum u_j x^j), with x the inverse order.
    """
    if r < 1:
        raise ValueError("order must be >= 1")
    _check_order(r, max_order)
    with _lock:
        if r not in _m_cache:
            _extend_uv(r)
            # w_j = v_j + a * t * u_{j-1}
            ws: list = [None]
            for j in range(1, r + 1):
                w: TAPoly = {e: {0: c} for e, c in _v_cache[j].items()}
                for e, c in _u_cache[j - 1].items():
                    tgt = w.setdefault(e + 1, {})
                    tgt[1] = tgt.get(1, Fraction(0)) + c
                ws.append(_clean_tap(w))
            logs = _series_log(ws, r, _tap_mul, _tap_scale, _tap_add)
            for j in range(1, r + 1):
                _m_cache.setdefault(j, _clean_tap(logs[j]))
        return {e: dict(ap) for e, ap in _m_cache[r].items()}


def z_table(r: int, max_order: int = DEFAULT_MAX_ORDER) -> Dict[int, Dict[int, Fraction]]:
    """Coefficient table z_{r,b}(a) of M_r, keyed by b with t-power r+2b."""
    m = m_poly(r, max_order)
    table: Dict[int, Dict[int, Fraction]] = {}
    for e, ap in m.items():
        b, rem = divmod(e - r, 2)
        if rem != 0 or b < 0 or b > r:
            raise AssertionError(f"M_{r} contains unexpected power t^{e}")
        table[b] = dict(ap)
    for b in range(r + 1):
        table.setdefault(b, {})
    return table


def eval_a_poly(ap: Dict[int, Fraction], a):
    """Evaluate an a-polynomial; exact if ``a`` is a Fraction."""
    return sum((c * a**d for d, c in sorted(ap.items())), start=a * 0)


def eval_t_poly(p: TPoly, t):
    return sum((c * t**e for e, c in sorted(p.items())), start=t * 0)


def m_poly_eval(r: int, t, a, max_order: int = DEFAULT_MAX_ORDER):
    """Evaluate M_r(t, a); exact for Fraction inputs."""
    total = t * 0
    for e, ap in sorted(m_poly(r, max_order).items()):
        total += eval_a_poly(ap, a) * t**e
    return total


def z_diff_sum(r: int, a):
    """Return sum_b (z_{r,b}(-a) - z_{r,b}(a)) = ((-a)^r - a^r) / r.

    Evaluated from the z-table, not from the closed form; the closed form is
    what the test suite checks it against.
    """
    if r < 1:
        raise ValueError("order must be >= 1")
    table = z_table(r)
    total = a * 0
    for b in sorted(table):
        total += eval_a_poly(table[b], -a) - eval_a_poly(table[b], a)
    return total


def z_diff_by_b(r: int, a) -> Dict[int, object]:
    """Per-b differences z_{r,b}(-a) - z_{r,b}(a), exact for Fraction a."""
    table = z_table(r)
    return {b: eval_a_poly(table[b], -a) - eval_a_poly(table[b], a) for b in sorted(table)}


def harmonic_number(m: int) -> Fraction:
    """H_m = sum_{j=1..m} 1/j; equals gamma + digamma(m+1) exactly in the
    rational part, which is how digamma factors enter the residue sums."""
    return sum((Fraction(1, j) for j in range(1, m + 1)), start=Fraction(0))
