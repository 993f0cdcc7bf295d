"""Built-in acceptance scenarios, grouped by criterion."""

from __future__ import annotations

from .scenario import Scenario, ScenarioReport, run

SIN_P = {"kind": "sin", "base": 2.0, "amp": 0.5}
BETAS_M2N1 = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
BETAS_M2N2 = [[int(i == a) + int(i == b) for i in range(4)] for a in range(4) for b in range(a, 4)] + \
             [[int(i == a) for i in range(4)] for a in range(4)] + [[0, 0, 0, 0]]

TITLES = {
    1: "Luxemburg norm vs closed-form L^p norm",
    2: "unit-ball modular",
    3: "Hoelder with r_p and duality sandwich",
    4: "generalized Hoelder refinement drift",
    5: "atom moment certificates",
    6: "Riesz potential oracle",
    7: "kernel derivative bound",
    8: "atom decay bound (plain and b-weighted)",
    9: "fractional integral boundedness sweep",
    10: "commutator boundedness sweep",
    11: "vector-valued Fefferman-Stein drift",
    12: "fractional maximal claim",
    13: "log-Hoelder classifier",
}


def _seeds(k: int, quick: bool, floor: int = 2) -> list[int]:
    return list(range(max(floor, k // 10) if quick else k))


def suite_scenarios(quick: bool = False) -> dict[int, list[Scenario]]:
    S = lambda k: _seeds(k, quick)  # noqa: E731
    out: dict[int, list[Scenario]] = {}
    out[1] = [Scenario(f"luxemburg_p{p:g}", "luxemburg", {"p": p, "rtol": 1e-6}, S(200), resolutions=[256])
              for p in (1.5, 2.0, 3.0)]
    out[2] = [Scenario("unit_ball", "unit_ball", {"p": {"kind": "sin", "base": 2.0, "amp": 1.0}, "tol": 1e-4},
                       S(200), resolutions=[240])]
    out[3] = [
        Scenario("holder_const", "holder", {"exponents": [1.5, 2.0, 3.0]}, S(500), resolutions=[240],
                 thresholds={"ratio_max": 1 + 1e-6}),
        Scenario("holder_var", "holder", {"exponents": [SIN_P]}, S(500), resolutions=[240],
                 thresholds={"ratio_max": 1 + 1e-6}),
        Scenario("duality_const", "duality", {"exponents": [1.5, 2.0, 3.0], "g_trials": 8}, S(50),
                 resolutions=[240]),
        Scenario("duality_var", "duality", {"exponents": [SIN_P], "g_trials": 8}, S(50), resolutions=[240]),
    ]
    out[4] = [Scenario("generalized_holder", "generalized_holder",
                       {"exponents": [{"kind": "sin", "base": 3.0, "amp": 1.0}, SIN_P]}, S(500),
                       resolutions=[240, 480], thresholds={"drift_c_max": 2.0})]
    out[5] = [Scenario(f"atoms_{fl}", "atoms", {"flavor": fl, "degrees": [0, 1, 2], "p": SIN_P}, S(100),
                       resolutions=[256]) for fl in ("plain", "b_weighted")]
    out[6] = [Scenario("riesz_oracle", "riesz_oracle", {"tolerances": {"512": 0.02, "2048": 0.005}}, [0],
                       resolutions=[512, 2048])]
    out[7] = [
        Scenario("kernel_beta0_m1", "kernel_derivative",
                 {"m": 1, "n": 1, "alpha": 0.5, "betas": [[0]], "expect": 1.0, "tol": 1e-12}, S(5)),
        Scenario("kernel_beta0_m2", "kernel_derivative",
                 {"m": 2, "n": 2, "alpha": 1.5, "betas": [[0, 0, 0, 0]], "expect": 1.0, "tol": 1e-12}, S(5)),
        Scenario("kernel_beta1_a0.5", "kernel_derivative",
                 {"m": 1, "n": 1, "alpha": 0.5, "betas": [[1]], "expect": 0.5, "tol": 1e-6}, S(5)),
        Scenario("kernel_beta1_a0.25", "kernel_derivative",
                 {"m": 1, "n": 1, "alpha": 0.25, "betas": [[1]], "expect": 0.75, "tol": 1e-6}, S(5)),
        Scenario("kernel_m2n1_scale", "kernel_derivative",
                 {"m": 2, "n": 1, "alpha": 0.5, "betas": BETAS_M2N1}, S(5), scales=[1.0, 2.0],
                 thresholds={"drift_c_max": 1.2}),
        Scenario("kernel_m2n2_scale", "kernel_derivative",
                 {"m": 2, "n": 2, "alpha": 1.5, "betas": BETAS_M2N2}, S(5), scales=[1.0, 2.0],
                 thresholds={"drift_c_max": 1.2}),
    ]
    out[8] = [Scenario(f"decay_{fl}_d{d}", "decay", {"flavor": fl, "d": d, "p": SIN_P}, S(100),
                       scales=[1.0, 2.0, 4.0], thresholds={"drift_c_max": 1.5})
              for fl in ("plain", "b_weighted") for d in (0, 1)]
    out[9] = [Scenario(f"theorem_{tag}", "theorem", {"p": p}, S(50), scales=[1.0, 2.0, 4.0],
                       shifts=[0.0, 1.5], thresholds={"drift_seed_max": 4.0})
              for tag, p in (("const", 2.0), ("var", SIN_P))]
    out[10] = [Scenario(f"commutator_{tag}", "commutator_theorem", {"p": p}, S(50), scales=[1.0, 2.0, 4.0],
                        shifts=[0.0, 1.5], thresholds={"drift_seed_max": 4.0})
               for tag, p in (("const", 2.0), ("var", SIN_P))]
    out[10].append(Scenario("commutator_b_const", "commutator_theorem",
                            {"p": SIN_P, "b_const": 0.7, "vanish_tol": 1e-12}, S(20), scales=[1.0, 4.0]))
    out[11] = [Scenario(f"fefferman_stein_a{a:g}", "fefferman_stein", {"p": SIN_P, "alpha": a, "lq": 2.0},
                        S(20), resolutions=[256, 512], thresholds={"drift_c_max": 2.0}) for a in (0.0, 0.25)]
    out[12] = [Scenario("claim", "claim", {"alpha": 0.5}, S(50), scales=[1.0, 2.0, 4.0],
                        thresholds={"drift_seed_max": 1.5})]
    out[13] = [
        Scenario("lh_constant", "lh_validate", {"fixture": "constant", "nodes": [5, 33, 2049], "expect": "pass"},
                 [0]),
        Scenario("lh_jump", "lh_validate", {"fixture": "jump", "nodes": [5, 33, 2049], "expect": "fail"}, [0]),
    ]
    return out


def run_criterion(k: int, quick: bool = False, threads: int = 1) -> list[ScenarioReport]:
    return [run(s, threads) for s in suite_scenarios(quick)[k]]
