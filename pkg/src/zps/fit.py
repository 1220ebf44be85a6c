"""Weighted nonlinear least-squares recovery of Zeeman populations.

The scan model is a sum of seven Lorentzians, one per |3,m> <-> |4,m|
transition, with shared Rabi frequency and Zeeman splitting and a fixed
background.  The solver is damped Gauss-Newton with an analytic Jacobian,
binomial weights, and projection onto the physical parameter region.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks

from .atom import F3_M_VALUES
from .measurement import RamanScan

M_VALUES = np.array(F3_M_VALUES, dtype=float)
RABI_WEIGHTS = 1.0 - M_VALUES**2 / 16.0

MAX_ITERATIONS = 500
OBJECTIVE_RTOL = 1e-10
STEP_RTOL = 1e-8


class IllPosedFitError(ValueError):
    """The normal equations are singular, e.g. the scan misses whole lines."""


@dataclass(frozen=True)
class FitModel:
    """Free parameters of the Lorentzian-sum scan model.

    populations[i] is p_{3,m} for m = -3..3; origin is a fixed reference
    offset of the detuning axis (not fitted), p_b the fixed background.
    """

    populations: np.ndarray
    Omega_0: float
    omega_B: float
    p_b: float = 0.006
    origin: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        if p.shape != (7,):
            raise ValueError("populations must be a 7-vector for m = -3..3")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("populations must lie in [0, 1]")
        if self.Omega_0 <= 0 or self.omega_B <= 0:
            raise ValueError("Omega_0 and omega_B must be > 0")
        p.setflags(write=False)
        object.__setattr__(self, "populations", p)


@dataclass(frozen=True)
class FitResult:
    model: FitModel
    population_errors: np.ndarray
    Omega_0_error: float
    omega_B_error: float
    population_sum: float
    population_sum_error: float
    residual_norm: float
    converged: bool
    iterations: int


def model_p4(delta_R, model: FitModel):
    """Transfer probability of the Lorentzian-sum model at detuning delta_R (rad/s)."""
    delta = np.atleast_1d(np.asarray(delta_R, dtype=float)) - model.origin
    d = delta[:, None] - model.omega_B * M_VALUES[None, :]
    omega_e_sq = RABI_WEIGHTS * model.Omega_0**2
    lor = 0.5 * omega_e_sq / (omega_e_sq + d**2)
    out = model.p_b + lor @ model.populations
    if np.isscalar(delta_R):
        return float(out[0])
    return out


def model_jacobian(delta_R, model: FitModel):
    """Analytic Jacobian of model_p4 w.r.t. (p_{-3..3}, Omega_0, omega_B); shape (N, 9)."""
    delta = np.asarray(delta_R, dtype=float) - model.origin
    d = delta[:, None] - model.omega_B * M_VALUES[None, :]
    omega_e_sq = RABI_WEIGHTS * model.Omega_0**2
    denom = omega_e_sq + d**2
    jac = np.empty((delta.size, 9))
    jac[:, :7] = 0.5 * omega_e_sq / denom
    d_omega0 = RABI_WEIGHTS * model.Omega_0 * d**2 / denom**2
    jac[:, 7] = (d_omega0 * model.populations).sum(axis=1)
    d_omegab = M_VALUES * omega_e_sq * d / denom**2
    jac[:, 8] = (d_omegab * model.populations).sum(axis=1)
    return jac


def _pack(model: FitModel):
    return np.concatenate([model.populations, [model.Omega_0, model.omega_B]])


def _unpack(theta, template: FitModel) -> FitModel:
    return replace(
        template,
        populations=np.clip(theta[:7], 0.0, 1.0),
        Omega_0=max(float(theta[7]), 1e-12),
        omega_B=max(float(theta[8]), 1e-12),
    )


def scan_weights(scan: RamanScan, p_model=None, readout=None) -> np.ndarray:
    """Binomial least-squares weights with a variance floor of 0.5/shots.

    The binomial variance is evaluated at p_model when given (iteratively
    reweighted fitting) and at the observed p-hat otherwise; fitting on
    observed values systematically biases the optimum, since downward
    fluctuations earn larger weights.  With a readout model, p_model is a true
    transfer probability, the variance applies in reported space, and the
    weights pick up the unfolding factor (2a-1)^2.  Analytic scans (shots = 0)
    get unit weights.
    """
    shots = scan.shots.astype(float)
    if np.all(shots == 0):
        return np.ones(len(scan))
    if np.any(shots == 0):
        raise ValueError("mixed analytic and sampled points are not supported")
    if p_model is None:
        q = scan.p4
    elif readout is None:
        q = np.clip(p_model, 0.0, 1.0)
    else:
        q = readout.fold(np.clip(p_model, 0.0, 1.0))
    w = shots / np.maximum(q * (1.0 - q), 0.5 / shots)
    if readout is not None:
        w = w * (2.0 * readout.accuracy - 1.0) ** 2
    return w


def fit_scan(scan: RamanScan, initial_guess: FitModel, fixed_p_b: float, readout=None) -> FitResult:
    """Fit the Lorentzian-sum model to a scan by damped Gauss-Newton.

    Minimizes the weighted squared residual with Levenberg-style damping
    (x10 on a rejected step, /10 on an accepted one), projecting populations
    onto [0, 1] after each step.  Binomial weights are re-evaluated at the
    current model each iteration.  p_b is held fixed at fixed_p_b.  With a
    readout model the recorded probabilities are unfolded first, so the fit
    recovers true transfer probabilities.  Non-convergence returns the best
    parameters found with converged=False; a singular normal system raises
    IllPosedFitError.
    """
    delta = 2.0 * math.pi * scan.delta_r_hz
    y = scan.p4 if readout is None else readout.unfold(scan.p4)
    model = replace(initial_guess, p_b=fixed_p_b)

    def objective(mdl, w):
        r = y - model_p4(delta, mdl)
        return float(np.sum(w * r**2)), r

    w = scan_weights(scan, model_p4(delta, model), readout)
    obj, resid = objective(model, w)
    lam = 1e-3
    converged = False
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        jac = model_jacobian(delta, model)
        a = jac.T @ (w[:, None] * jac)
        g = jac.T @ (w * resid)
        diag = np.diag(a).copy()
        if np.any(diag <= 0.0) or not np.all(np.isfinite(diag)):
            raise IllPosedFitError(
                "normal equations are rank deficient; the scan grid may miss lines"
            )
        theta = _pack(model)
        accepted = False
        for _ in range(50):
            try:
                step = np.linalg.solve(a + lam * np.diag(diag), g)
            except np.linalg.LinAlgError as exc:
                raise IllPosedFitError("singular damped normal equations") from exc
            candidate = _unpack(theta + step, model)
            new_obj, new_resid = objective(candidate, w)
            if new_obj <= obj:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
        step_rel = np.linalg.norm(_pack(candidate) - theta) / max(np.linalg.norm(theta), 1e-300)
        obj_decrease = obj - new_obj
        model, resid = candidate, new_resid
        prev_obj, obj = obj, new_obj
        lam = max(lam / 10.0, 1e-12)
        if obj_decrease <= OBJECTIVE_RTOL * max(prev_obj, 1e-300) or step_rel <= STEP_RTOL:
            converged = True
            break
        w = scan_weights(scan, model_p4(delta, model), readout)
        obj, resid = objective(model, w)

    w = scan_weights(scan, model_p4(delta, model), readout)
    jac = model_jacobian(delta, model)
    a = jac.T @ (w[:, None] * jac)
    try:
        cov = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise IllPosedFitError("covariance is singular at the optimum") from exc
    errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    pop_cov = cov[:7, :7]
    return FitResult(
        model=model,
        population_errors=errors[:7],
        Omega_0_error=float(errors[7]),
        omega_B_error=float(errors[8]),
        population_sum=float(model.populations.sum()),
        population_sum_error=float(math.sqrt(max(pop_cov.sum(), 0.0))),
        residual_norm=obj,
        converged=converged,
        iterations=iterations,
    )


def _smooth_scan(scan: RamanScan):
    y = scan.p4
    if len(scan) >= 5:
        return np.convolve(y, np.ones(3) / 3.0, mode="same")
    return y


def _populations_from_heights(scan: RamanScan, smooth, omega_b: float, p_b: float):
    centers_hz = omega_b * M_VALUES / (2.0 * math.pi)
    pops = np.zeros(7)
    lo, hi = scan.delta_r_hz[0], scan.delta_r_hz[-1]
    for i, c in enumerate(centers_hz):
        if lo <= c <= hi:
            height = float(np.interp(c, scan.delta_r_hz, smooth))
            pops[i] = np.clip(2.0 * (height - p_b), 0.0, 1.0)
    return pops


def default_initial_guess(
    scan: RamanScan,
    fallback_omega_B: float = 2.0 * math.pi * 910e3,
    fallback_Omega_0: float = 2.0 * math.pi * 120e3,
    p_b: float = 0.006,
) -> FitModel:
    """Heuristic starting point from the scan's visible peaks.

    omega_B comes from the median spacing of detected local maxima (fallback
    value when fewer than two peaks are found, with a warning); populations
    from twice the background-subtracted height at each predicted line center.
    """
    smooth = _smooth_scan(scan)
    span = smooth.max() - smooth.min()
    peaks, _ = find_peaks(smooth, prominence=max(0.25 * span, 0.02))
    omega_b = fallback_omega_B
    if peaks.size >= 2:
        spacing_hz = float(np.median(np.diff(scan.delta_r_hz[peaks])))
        if spacing_hz > 0:
            omega_b = 2.0 * math.pi * spacing_hz
    else:
        warnings.warn("no usable peak structure found; falling back to configured guesses")
    pops = _populations_from_heights(scan, smooth, omega_b, p_b)
    return FitModel(
        populations=pops, Omega_0=fallback_Omega_0, omega_B=omega_b, p_b=p_b, origin=0.0
    )


def initial_guess_candidates(
    scan: RamanScan,
    fallback_omega_B: float = 2.0 * math.pi * 910e3,
    fallback_Omega_0: float = 2.0 * math.pi * 120e3,
    p_b: float = 0.006,
) -> list[FitModel]:
    """Starting points for a multistart fit.

    The peak-spacing guess can lock onto noise spikes when only one line
    dominates the scan, so the configured Zeeman splitting is always offered
    as a second start.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        peak_guess = default_initial_guess(scan, fallback_omega_B, fallback_Omega_0, p_b)
    candidates = [peak_guess]
    if abs(peak_guess.omega_B - fallback_omega_B) > 1e-9 * fallback_omega_B:
        smooth = _smooth_scan(scan)
        pops = _populations_from_heights(scan, smooth, fallback_omega_B, p_b)
        candidates.append(
            FitModel(
                populations=pops,
                Omega_0=fallback_Omega_0,
                omega_B=fallback_omega_B,
                p_b=p_b,
                origin=0.0,
            )
        )
    return candidates


def fit_scan_multistart(scan: RamanScan, guesses, fixed_p_b: float, readout=None) -> FitResult:
    """Fit from each starting model and keep the best outcome.

    Converged results beat non-converged ones; ties break on the weighted
    residual.  Raises IllPosedFitError only if every start fails.
    """
    best = None
    first_error = None
    for guess in guesses:
        try:
            result = fit_scan(scan, guess, fixed_p_b, readout)
        except IllPosedFitError as exc:
            if first_error is None:
                first_error = exc
            continue
        key = (not result.converged, result.residual_norm)
        if best is None or key < best[0]:
            best = (key, result)
    if best is None:
        raise first_error if first_error is not None else IllPosedFitError("no starting models")
    return best[1]
