"""
Sampled-data analysis: periodic orbit of the stroboscopic map and the
eigenvalues of its Jacobian.
"""
import logging
from typing import List, Optional, Tuple, Union

import numpy as np

from fsikit.core.config import settings
from fsikit.core.exceptions import ConvergenceError, DCMError
from fsikit.schemas.converter import ConverterConfig
from fsikit.schemas.results import ConverterState, PeriodicOrbit, PoincareResult
from fsikit.services.switchsim_service import CycleResult, SwitchedModel

logger = logging.getLogger(__name__)

_MAX_STEP_HALVINGS = 10


def _advance(model: SwitchedModel, x: np.ndarray) -> CycleResult:
    res = model.cycle(x)
    if res.dcm:
        raise DCMError()
    return res


class SdaService:
    """Stroboscopic map, Newton shooting and Jacobian eigenvalues."""

    @staticmethod
    def stroboscopic_map(
        cfg: ConverterConfig, x: Union[ConverterState, np.ndarray], model: Optional[SwitchedModel] = None
    ) -> np.ndarray:
        """State one clock period after x."""
        model = model or SwitchedModel(cfg)
        return _advance(model, model.state_vector(x)).x_end

    @staticmethod
    def find_periodic_orbit(
        cfg: ConverterConfig,
        x_guess: Optional[Union[ConverterState, np.ndarray]] = None,
        model: Optional[SwitchedModel] = None,
    ) -> PeriodicOrbit:
        """
        Solve P(x) = x by Newton's method with a finite-difference Jacobian.

        Raises:
            ConvergenceError: If the scaled residual stays above NEWTON_TOL
            DCMError: If an iterate leaves continuous conduction
        """
        model = model or SwitchedModel(cfg)
        scale = model.state_scale()
        x = model.initial_state(0.0) if x_guess is None else model.state_vector(x_guess)
        eye = np.eye(model.n)
        residuals: List[float] = []

        res = _advance(model, x)
        for iteration in range(settings.NEWTON_MAX_ITER + 1):
            r = res.x_end - x
            norm = float(np.max(np.abs(r) / scale))
            residuals.append(norm)
            logger.debug("Newton iteration %d: residual %.3e", iteration, norm)
            if norm < settings.NEWTON_TOL:
                logger.info("Periodic orbit found after %d iterations (duty %.6f)", iteration, res.duty)
                return PeriodicOrbit(state=x, duty=res.duty, iterations=iteration, residuals=residuals)
            if iteration == settings.NEWTON_MAX_ITER:
                break

            jac = np.empty((model.n, model.n))
            for j in range(model.n):
                step = settings.SDA_STEP * scale[j]
                xp = x.copy()
                xp[j] += step
                jac[:, j] = (_advance(model, xp).x_end - res.x_end) / step
            try:
                dx = np.linalg.solve(jac - eye, -r)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError("Singular Newton matrix", residuals) from exc

            lam = 1.0
            while True:
                x_new = x + lam * dx
                res_new = _advance(model, x_new)
                if np.max(np.abs(res_new.x_end - x_new) / scale) < norm or lam < 1.0 / 64:
                    break
                lam /= 2.0
            x, res = x_new, res_new

        raise ConvergenceError(
            f"Newton did not converge in {settings.NEWTON_MAX_ITER} iterations", residuals
        )

    @staticmethod
    def monodromy(model: SwitchedModel, orbit: PeriodicOrbit, step: float) -> Tuple[np.ndarray, bool]:
        """
        Central-difference Jacobian of the map at the orbit.

        Returns the Jacobian and whether every perturbed cycle kept the
        switching sequence of the orbit.
        """
        scale = model.state_scale()
        x = orbit.state
        base = _advance(model, x).sequence
        jac = np.empty((model.n, model.n))
        same = True
        for j in range(model.n):
            h = step * scale[j]
            for _ in range(_MAX_STEP_HALVINGS):
                xp, xm = x.copy(), x.copy()
                xp[j] += h
                xm[j] -= h
                rp, rm = _advance(model, xp), _advance(model, xm)
                if rp.sequence == base and rm.sequence == base:
                    break
                h /= 2.0
            else:
                same = False
            jac[:, j] = (rp.x_end - rm.x_end) / (2.0 * h)
        return jac, same

    @staticmethod
    def jacobian_eigenvalues(
        cfg: ConverterConfig, orbit: Optional[PeriodicOrbit] = None, model: Optional[SwitchedModel] = None
    ) -> Tuple[np.ndarray, np.ndarray, List[str]]:
        """Jacobian, its eigenvalues (sorted by real part) and robustness warnings."""
        model = model or SwitchedModel(cfg)
        orbit = orbit or SdaService.find_periodic_orbit(cfg, model=model)
        warnings: List[str] = []
        jac, same = SdaService.monodromy(model, orbit, settings.SDA_STEP)
        if not same:
            warnings.append("Switching sequence changed under every tried perturbation")
        eig = np.sort_complex(np.linalg.eigvals(jac))
        half, _ = SdaService.monodromy(model, orbit, settings.SDA_STEP / 2.0)
        eig_half = np.sort_complex(np.linalg.eigvals(half))
        spread = float(np.max(np.abs(eig - eig_half)))
        if spread > settings.SDA_EIG_TOL:
            msg = f"Eigenvalues moved by {spread:.2e} when the difference step was halved"
            logger.warning(msg)
            warnings.append(msg)
        return jac, eig, warnings

    @staticmethod
    def sda_verdict(cfg: ConverterConfig, x_guess: Optional[np.ndarray] = None) -> PoincareResult:
        """
        Stable when every eigenvalue lies inside the unit circle by SDA_EIG_TOL;
        moduli within SDA_EIG_TOL of 1 are reported as marginal.
        """
        model = SwitchedModel(cfg)
        orbit = SdaService.find_periodic_orbit(cfg, x_guess=x_guess, model=model)
        jac, eig, warnings = SdaService.jacobian_eigenvalues(cfg, orbit=orbit, model=model)
        modulus = float(np.max(np.abs(eig)))
        tol = settings.SDA_EIG_TOL
        return PoincareResult(
            orbit=orbit, jacobian=jac, eigenvalues=eig,
            stable=modulus < 1.0 - tol, marginal=abs(modulus - 1.0) <= tol,
            dominant_modulus=modulus, warnings=warnings,
        )
