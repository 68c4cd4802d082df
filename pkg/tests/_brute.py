"""Independent reference implementations used to cross-check the library.

Everything here is written with plain dict/loops on the joint's atoms, on
purpose: these must not share code paths (or numpy reductions) with the
oracle module they check.
"""

from collections import defaultdict


def brute_cells(joint):
    """Cell probabilities, untreated-trend means, and untreated level means,
    accumulated atom by atom."""
    mass = defaultdict(float)
    trend = defaultdict(float)
    lvl0 = defaultdict(float)
    lvl1 = defaultdict(float)
    total = 0.0
    for atom in joint.atoms:
        cell = (atom.treat.d0, atom.treat.d1)
        p = atom.prob
        total += p
        mass[cell] += p
        flat = atom.state.po.flat
        trend[cell] += p * (flat[2] - flat[0])
        lvl0[cell] += p * flat[0]
        lvl1[cell] += p * flat[2]
    out = {}
    for cell, m in mass.items():
        out[cell] = {
            "prob": m / total,
            "trend_mean": trend[cell] / m,
            "level_y0": lvl0[cell] / m,
            "level_y1": lvl1[cell] / m,
        }
    return out


def brute_pt_deviation(joint):
    cells = brute_cells(joint)
    trends = [st["trend_mean"] for st in cells.values()]
    return max(trends) - min(trends)


def brute_att_switchers(joint):
    num = 0.0
    den = 0.0
    for atom in joint.atoms:
        if atom.treat.d0 == 0 and atom.treat.d1 == 1:
            flat = atom.state.po.flat
            num += atom.prob * (flat[3] - flat[2])
            den += atom.prob
    return num / den


def brute_posterior(prior, observation):
    """Posterior mean of a Bernoulli parameter after one draw, by Bayes rule
    on the prior atoms; falls back to the prior mean if the observation has
    zero probability."""
    num = 0.0
    den = 0.0
    for theta, w in prior:
        like = theta if observation == 1 else 1.0 - theta
        num += w * like * theta
        den += w * like
    if den == 0.0:
        return sum(w * theta for theta, w in prior)
    return num / den


def brute_stopping_residual(joint):
    """The stopping-selection residual recomputed purely from the joint:
    E[dY(0); stay-unstopped cell] minus the overall untreated trend times
    that cell's mass.  Matches the per-type enumeration when it is zero and
    when it is not."""
    total = 0.0
    stay = 0.0
    stay_mass = 0.0
    norm = 0.0
    for atom in joint.atoms:
        flat = atom.state.po.flat
        d = flat[2] - flat[0]
        total += atom.prob * d
        norm += atom.prob
        if atom.treat.d0 == 0 and atom.treat.d1 == 0:
            stay += atom.prob * d
            stay_mass += atom.prob
    tau = total / norm
    return stay / norm - tau * (stay_mass / norm)


def brute_entering_trend_reconstruction(joint):
    """Rebuild the entering cell's untreated trend from the other three
    cells' trends and the transition shares, returning (reconstructed,
    actual)."""
    cells = brute_cells(joint)
    p_d0 = {0: 0.0, 1: 0.0}
    for (d0, d1), st in cells.items():
        p_d0[d0] += st["prob"]
    p_enter = cells.get((0, 1), {"prob": 0.0})["prob"] / p_d0[0]

    def share(d0, d1):
        st = cells.get((d0, d1))
        return 0.0 if st is None else st["prob"] / p_d0[d0]

    def trend(d0, d1):
        st = cells.get((d0, d1))
        return 0.0 if st is None else st["trend_mean"]

    reconstructed = (
        share(1, 1) * trend(1, 1) + share(1, 0) * trend(1, 0) - share(0, 0) * trend(0, 0)
    ) / p_enter
    return reconstructed, trend(0, 1)
