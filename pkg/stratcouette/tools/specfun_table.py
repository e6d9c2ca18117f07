import logging

import numpy as np

from stratcouette.backend.errors import StratCouetteError
from stratcouette.backend.settings import RunConfig
from stratcouette.backend.specfun import bessel_k0, regime_of, whittaker_derivatives
from stratcouette.tools.output import (
    COMMON_KEYS,
    ToolSpec,
    config_schema,
    error_result,
    finish,
    make_check,
    write_csv,
    write_report,
)

logger = logging.getLogger(__name__)

ODE_TOLERANCE = 1e-8
K0_TOLERANCE = 1e-10


def specfun_table_tool():
    return ToolSpec(
        name="specfun-table",
        description="Tabulate W_{0,gamma}, W', K_0 and Whittaker ODE residuals on a log zeta-grid.",
        inputSchema=config_schema("beta", "m", "zeta_min", "zeta_max", "n_zeta", *COMMON_KEYS[-3:]),
    )


def run_specfun_table(config: RunConfig) -> dict:
    params = config.params()
    gamma = params.gamma
    zeta = np.geomspace(config.zeta_min, config.zeta_max, config.n_zeta).astype(complex)
    try:
        w, wp, wpp = whittaker_derivatives(gamma, zeta, order=2)
        k0 = bessel_k0(zeta)
    except StratCouetteError as e:
        logger.error("specfun-table failed for gamma=%s: %s", gamma, e)
        return error_result(f"specfun-table(gamma={gamma}, zeta in [{config.zeta_min}, {config.zeta_max}])", e)

    potential = -0.25 + (0.25 - gamma * gamma) / (zeta * zeta)
    residual = np.abs(wpp + potential * w) / np.maximum(np.abs(w), 1e-30)

    checks = [make_check("whittaker_ode_residual", float(residual.max()) <= ODE_TOLERANCE,
                         float(residual.max()), ODE_TOLERANCE)]
    if params.is_log_case:
        # W_{0,0}(zeta) = sqrt(zeta/pi) K_0(zeta/2)
        reference = np.sqrt(zeta / np.pi) * bessel_k0(zeta / 2)
        k0_err = float(np.max(np.abs(w - reference) / np.abs(reference)))
        checks.append(make_check("w00_vs_k0", k0_err <= K0_TOLERANCE, k0_err, K0_TOLERANCE))

    regimes = regime_of(gamma, zeta)
    meta = {"gamma": repr(complex(gamma)), "regimes": ",".join(sorted(set(regimes.tolist())))}
    files = [
        write_csv(
            config.output_path("_specfun.csv"),
            config,
            {"zeta": zeta, "w": w, "wp": wp, "ode_residual": residual, "k0": k0},
            meta,
        ),
        write_report(config, "_specfun_checks", {"gamma": complex(gamma), "max_ode_residual": float(residual.max())}, checks),
    ]
    return finish("specfun-table", files, checks)
