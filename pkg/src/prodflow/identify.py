"""Fitting productivity functions from recorded runs.

Two estimators:

* ``fit_fdp`` regresses the output directly on the input, y = alpha * u,
  the first-degree-polynomial baseline whose goodness of fit sets the
  benchmark any dynamic model has to beat.
* ``fit_productivity`` searches for an impulse-plus-exponential-sum kernel
  whose simulated response to the recorded input best matches the recorded
  output (output-error least squares).  Decay rates come from a geometric
  candidate grid (optionally mirrored to negative, growing rates); for
  every rate combination the gains and the impulse gain are a linear
  least-squares solve.  The best combination of each model order is then
  polished by coordinate descent with a golden-section line search per
  rate, and the lowest order wins ties.  The whole procedure is
  deterministic: same run and config, same model.

Goodness of fit is NRMSE, 1 - ||y - yhat|| / ||y - mean(y)||: 1 is an
exact match, 0 means no better than the mean.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import ExponentialMode, ProcessRun, ProductivityFunction, TimeSeries, resample, uniform_grid
from .transient import trapezoid_convolve

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0
# growing-mode candidates faster than exp(150) over the record overflow
# normal equations well before they could ever be a sane fit
_MAX_GROWTH_EXPONENT = 150.0


@dataclass(frozen=True)
class FdpFit:
    alpha: float
    gof: float


@dataclass(frozen=True)
class FitConfig:
    """Search space and effort knobs for fit_productivity."""

    max_modes: int = 2
    allow_impulse: bool = True
    allow_unstable: bool = True
    rate_min: float = 1e-3
    rate_max: float = 1e3
    points_per_decade: int = 60
    refine_iterations: int = 50

    def __post_init__(self):
        if self.max_modes < 1:
            raise ValueError("max_modes must be >= 1")
        if not (0 < self.rate_min < self.rate_max):
            raise ValueError("need 0 < rate_min < rate_max")
        if self.points_per_decade < 1:
            raise ValueError("points_per_decade must be >= 1")
        if self.refine_iterations < 0:
            raise ValueError("refine_iterations must be >= 0")


@dataclass(frozen=True)
class FitResult:
    model: ProductivityFunction
    gof: float
    residual_norm: float


def rate_grid(cfg: FitConfig = FitConfig()) -> np.ndarray:
    """Geometric grid of candidate decay rates, strictly increasing."""
    decades = math.log10(cfg.rate_max / cfg.rate_min)
    n = int(round(decades * cfg.points_per_decade))
    return cfg.rate_min * 10.0 ** (np.arange(n + 1) / cfg.points_per_decade)


def goodness_of_fit(predicted: TimeSeries, observed: TimeSeries) -> float:
    """NRMSE of a prediction against an observation on the same grid."""
    if len(predicted) != len(observed) or not np.array_equal(predicted.t, observed.t):
        raise ValueError("predicted and observed series must share the same time grid")
    return _nrmse(observed.values, predicted.values)


def _nrmse(y: np.ndarray, yhat: np.ndarray) -> float:
    den = float(np.linalg.norm(y - y.mean()))
    num = float(np.linalg.norm(y - yhat))
    # residuals at rounding-noise level count as exact; otherwise a perfect
    # feedthrough fit of a constant signal would score num/den on pure dust
    if num <= 1e-12 * max(float(np.linalg.norm(y)), den):
        return 1.0
    if den == 0.0:
        return -math.inf
    return 1.0 - num / den


def _common_grid(run: ProcessRun) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Input and output resampled onto one uniform grid; returns (t, u, y, dt)."""
    inp, out = run.input, run.output
    din, dout = np.diff(inp.t), np.diff(out.t)
    same = len(inp) == len(out) and np.array_equal(inp.t, out.t)
    if same and np.allclose(din, din[0], rtol=1e-9, atol=0.0):
        return inp.t.copy(), inp.values.copy(), out.values.copy(), float(din.mean())
    t0 = max(inp.t[0], out.t[0])
    t1 = min(inp.t[-1], out.t[-1])
    dt = float(min(np.median(din), np.median(dout)))
    grid = uniform_grid(t0, t1, dt)
    if len(grid) < 2:
        raise ValueError("input and output overlap on fewer than 2 samples")
    return grid, resample(inp, grid), resample(out, grid), dt


def fit_fdp(run: ProcessRun) -> FdpFit:
    """Least-squares static gain y = alpha * u and its goodness of fit."""
    _, u, y, _ = _common_grid(run)
    uu = float(u @ u)
    if uu == 0.0:
        raise ValueError("input is identically zero; alpha undefined")
    alpha = float(u @ y) / uu
    return FdpFit(alpha, _nrmse(y, alpha * u))


def _mode_response(rate: float, tau: np.ndarray, u: np.ndarray, dt: float) -> np.ndarray:
    return trapezoid_convolve(np.exp(-rate * tau), u, dt)


def _solve_gains(rates, tau, u, y, dt, allow_impulse):
    """Least-squares gains for fixed rates; returns (residual_sq, impulse, gains)."""
    cols = ([u] if allow_impulse else []) + [_mode_response(r, tau, u, dt) for r in rates]
    A = np.column_stack(cols)
    theta, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ theta
    if allow_impulse:
        return float(r @ r), float(theta[0]), [float(g) for g in theta[1:]]
    return float(r @ r), 0.0, [float(g) for g in theta]


def _combo_chunks(n: int, k: int, chunk: int):
    """Size-k index combinations in lexicographic order, as (rows, k) blocks.

    Streamed so that large k never materializes the whole combination set.
    """
    if k == 0:
        yield np.empty((1, 0), dtype=np.intp)
    elif k == 1:
        idx = np.arange(n, dtype=np.intp)[:, None]
        for lo in range(0, n, chunk):
            yield idx[lo : lo + chunk]
    elif k == 2:
        i, j = np.triu_indices(n, 1)
        pairs = np.column_stack([i, j]).astype(np.intp, copy=False)
        for lo in range(0, len(pairs), chunk):
            yield pairs[lo : lo + chunk]
    else:
        it = itertools.combinations(range(n), k)
        while True:
            block = list(itertools.islice(it, chunk))
            if not block:
                return
            yield np.array(block, dtype=np.intp)


def fit_productivity(run: ProcessRun, cfg: FitConfig = FitConfig()) -> FitResult:
    """Best impulse-plus-exponential-sum model for a recorded run.

    With allow_impulse the static baseline is inside the search space
    (the zero-mode candidate), so the returned gof never falls below
    fit_fdp's.  Ties between model orders go to the smaller model;
    grid ties go to the lexicographically smallest rate vector.
    """
    t, u, y, dt = _common_grid(run)
    if float(u @ u) == 0.0:
        raise ValueError("input is identically zero; nothing to identify")
    yy = float(y @ y)
    if yy == 0.0:
        raise ValueError("output is identically zero; nothing to identify")
    grid = rate_grid(cfg)
    if len(grid) < cfg.max_modes:
        raise ValueError("rate grid has fewer points than max_modes")
    tau = t - t[0]
    span = float(tau[-1])
    rates = list(grid)
    if cfg.allow_unstable:
        rates += [-r for r in grid if r * span <= _MAX_GROWTH_EXPONENT]
    rates = np.sort(np.asarray(rates))

    # all candidate mode responses at once (batched trapezoid convolution),
    # normalized so the combination Gram matrices stay well conditioned
    kernels = np.exp(-np.outer(rates, tau))
    nfft = 1 << max(2 * len(t) - 1, 2).bit_length()
    S = np.fft.irfft(np.fft.rfft(kernels, nfft, axis=1) * np.fft.rfft(u, nfft), nfft, axis=1)[:, : len(t)]
    S -= 0.5 * (kernels[:, :1] * u[None, :] + kernels * u[0])
    S *= dt
    norms = np.linalg.norm(S, axis=1)
    usable = norms > 0
    rates, S, norms = rates[usable], S[usable], norms[usable]
    S /= norms[:, None]

    if cfg.allow_impulse:
        B = np.vstack([u / np.linalg.norm(u), S])
        offset = 1
    else:
        B, offset = S, 0
    G = B @ B.T
    c = B @ y
    tie_tol = 1e-12 * yy

    def best_grid_combo(k: int) -> tuple[float, np.ndarray] | None:
        """Lowest-residual rate-index set of size k (first wins exact ties)."""
        best_res, best_set = math.inf, None
        for part in _combo_chunks(len(rates), k, 200_000):
            if offset:
                sel = np.concatenate([np.zeros((len(part), 1), dtype=np.intp), part + offset], axis=1)
            else:
                sel = part
            if sel.shape[1] == 0:
                continue
            Gs = G[sel[:, :, None], sel[:, None, :]]
            cs = c[sel]
            res = np.full(len(part), math.inf)
            ok = np.abs(np.linalg.det(Gs)) > 1e-10
            if ok.any():
                theta = np.linalg.solve(Gs[ok], cs[ok][..., None])[..., 0]
                res[ok] = yy - np.einsum("ij,ij->i", theta, cs[ok])
            j = int(np.argmin(res))
            if res[j] < best_res:
                best_res, best_set = float(res[j]), part[j]
        if best_set is None:
            return None
        return best_res, best_set

    def refine(rates0: list[float]) -> tuple[float, list[float]]:
        """Coordinate descent over |rate|, golden section within a grid-step bracket."""
        ratio = 10.0 ** (2.0 / cfg.points_per_decade)
        cur = list(rates0)
        cur_res = _solve_gains(cur, tau, u, y, dt, cfg.allow_impulse)[0]
        for _ in range(cfg.refine_iterations):
            before = cur_res
            for i in range(len(cur)):
                sign = math.copysign(1.0, cur[i])

                def f(mag: float) -> float:
                    trial = cur[:i] + [sign * mag] + cur[i + 1 :]
                    return _solve_gains(trial, tau, u, y, dt, cfg.allow_impulse)[0]

                a, b = abs(cur[i]) / ratio, abs(cur[i]) * ratio
                x1, x2 = b - _GOLD * (b - a), a + _GOLD * (b - a)
                f1, f2 = f(x1), f(x2)
                for _ in range(34):
                    if f1 <= f2:
                        b, x2, f2 = x2, x1, f1
                        x1 = b - _GOLD * (b - a)
                        f1 = f(x1)
                    else:
                        a, x1, f1 = x1, x2, f2
                        x2 = a + _GOLD * (b - a)
                        f2 = f(x2)
                mag, val = (x1, f1) if f1 <= f2 else (x2, f2)
                if val < cur_res:
                    cur[i], cur_res = sign * mag, val
            if before - cur_res <= 1e-15 * max(before, 1.0):
                break
        return cur_res, cur

    overall_res, overall_rates = math.inf, None
    for k in range(0 if cfg.allow_impulse else 1, cfg.max_modes + 1):
        found = best_grid_combo(k)
        if found is None:
            continue
        res, idx_set = found
        if not math.isfinite(res):
            continue
        if k == 0:
            ref_res, ref_rates = res, []
        else:
            ref_res, ref_rates = refine([float(rates[i]) for i in idx_set])
        if ref_res < overall_res - tie_tol:
            overall_res, overall_rates = ref_res, ref_rates
    if overall_rates is None:
        raise ValueError("rate grid exhausted without a finite residual")

    _, impulse, gains = _solve_gains(overall_rates, tau, u, y, dt, cfg.allow_impulse)
    if not overall_rates and impulse == 0.0:
        raise ValueError("output is orthogonal to every candidate response; nothing to identify")
    modes = tuple(
        ExponentialMode(g, r)
        for g, r in sorted(zip(gains, overall_rates), key=lambda gr: gr[1])
    )
    predicted = impulse * u
    for g, r in zip(gains, overall_rates):
        predicted = predicted + g * _mode_response(r, tau, u, dt)
    return FitResult(
        ProductivityFunction(impulse, modes),
        _nrmse(y, predicted),
        float(np.linalg.norm(y - predicted)),
    )
