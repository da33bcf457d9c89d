"""The registered comparisons.

Sub-network sizing for the equal-target comparisons: every model uses the
same hidden widths for every network that reads the input function (branch,
scale, shift, pre-net, hypernetwork). For a target ``[d_y, *hidden, 1]`` the
DeepONet trunk is ``[d_y, *hidden]`` with ``p = hidden[-1]`` basis functions
and the branch is ``[m, *hidden[:-1], p]``.
"""

from __future__ import annotations

from ..models import MlpSpec, count_params
from .specs import Bound, ExperimentSpec, ModelSpec

DESK_TRAIN, DESK_TEST = 200, 50
FULL_TRAIN, FULL_TEST = 1000, 200

# per-model decay rates, in the order DeepONet, Shift, Flex, NOMAD, Hyper
DECAY = {
    "identity": (0.0005, 0.0002, 0.0005, 0.0001, 0.0001),
    "differentiation": (0.0005, 0.0002, 0.0005, 0.0001, 0.0001),
    "advection": (0.0005, 0.0001, 0.0001, 0.0002, 0.0005),
    "burgers": (0.0001, 0.0005, 0.0002, 0.0001, 0.0001),
    "shallow": (0.0001, 0.0005, None, 0.0001, 0.0005),
}
LABELS = ("DeepONet", "Shift", "Flex", "NOMAD", "Hyper")

SENSORS = {"identity": 50, "differentiation": 100, "advection": 40, "burgers": 128, "shallow": 256}

# desk epoch budgets, sized to the runtime caps on one core
EPOCHS = {"identity": 500, "differentiation": 300, "advection": 20, "burgers": 20, "sweep": 150}

REFERENCE_SAME_TARGET = {
    "identity": {"DeepONet": (0.578, 0.003), "Shift": (0.777, 0.018), "Flex": (0.678, 0.062),
                 "NOMAD": (0.578, 0.020), "Hyper": (0.036, 0.005)},
    "differentiation": {"DeepONet": (0.559, 0.001), "Shift": (0.624, 0.015), "Flex": (0.562, 0.016),
                        "NOMAD": (0.558, 0.003), "Hyper": (0.127, 0.043)},
}
REFERENCE_SAME_BUDGET = {
    "advection": {"DeepONet": (0.0046, 0.0017), "Hyper": (0.0048, 0.0009), "c-Hyper": (0.0043, 0.0004)},
    "burgers": {"DeepONet": (0.0391, 0.0040), "Hyper": (0.0196, 0.0044), "c-Hyper": (0.0066, 0.0009)},
    "shallow": {"DeepONet": (0.0279, 0.0042), "Hyper": (0.0148, 0.0002)},
    "shallow-small": {"DeepONet": (0.0391, 0.0066), "Hyper": (0.0209, 0.0013)},
}


def equal_target_models(m: int, d_y: int, hidden: tuple[int, ...], activation: str,
                        decay: tuple, kinds=LABELS) -> tuple[ModelSpec, ...]:
    """All five models sharing the target network ``[d_y, *hidden, 1]``."""
    p = hidden[-1]
    inner = hidden[:-1]
    w = hidden[0]
    target = (d_y, *hidden, 1)
    n_theta = count_params(MlpSpec(target))
    table = {
        "DeepONet": ("deeponet", (("branch", (m, *inner, p)), ("trunk", (d_y, *hidden)))),
        "Shift": ("shift", (("scale", (m, *inner, w * d_y)), ("shift", (m, *inner, w)),
                            ("branch", (m, *inner, p)), ("trunk", hidden))),
        "Flex": ("flex", (("pre", (m, *inner, w)), ("branch", (m, *inner, p + 1)),
                          ("trunk", (d_y, *hidden)))),
        "NOMAD": ("nomad", (("branch", (m, *inner, p)), ("target", (p + d_y, *hidden, 1)))),
        "Hyper": ("hyper", (("hyper", (m, *inner, n_theta)), ("target", target))),
    }
    out = []
    for label, rate in zip(LABELS, decay):
        if label in kinds and rate is not None:
            kind, nets = table[label]
            out.append(ModelSpec(label, kind, nets, activation, rate))
    return tuple(out)


def scenario_same_target(problem: str) -> ExperimentSpec:
    if problem not in ("identity", "differentiation"):
        raise ValueError(f"same-target scenario covers identity and differentiation, not {problem!r}")
    m = SENSORS[problem]
    models = equal_target_models(m, 1, (20, 20, 10), "tanh", DECAY[problem])
    others = tuple(x.label for x in models if x.label != "Hyper")
    bounds = [Bound("ratio", "Hyper", 0.5, others if problem == "identity" else ("DeepONet",))]
    if problem == "identity":
        bounds.append(Bound("above", "DeepONet", 0.3))
    return ExperimentSpec(
        name=f"same-target-{problem}", problem=problem, m=m, d_y=1, models=models,
        n_train=DESK_TRAIN, n_test=DESK_TEST, epochs=EPOCHS[problem], batch_fraction=0.1,
        bounds=tuple(bounds), reference_errors=REFERENCE_SAME_TARGET[problem],
        runtime_budget_s=900.0 if problem == "identity" else 1200.0,
        scaling={"n_train": f"{DESK_TRAIN} of {FULL_TRAIN}", "n_test": f"{DESK_TEST} of {FULL_TEST}",
                 "epochs": f"{EPOCHS[problem]} (desk cap)"},
        eval_every=max(1, EPOCHS[problem] // 10),
    )


def _n_theta(*target) -> int:
    return count_params(MlpSpec(target))


# advection: target 256-wide; c-Hyper latent width 16 reproduces the printed 208K
ADVECTION_CHUNK = (1024, 16)
BURGERS_CHUNK = (512, 8)


def _budget_models(problem: str) -> tuple[ModelSpec, ...]:
    m = SENSORS[problem]
    d_dec, _, _, _, d_hyp = DECAY[problem]
    if problem == "advection":
        return (
            ModelSpec("DeepONet", "deeponet", (("branch", (m, 256, 256)), ("trunk", (1, 256, 256, 256, 256))),
                      "relu", d_dec, expected_params=274_177, printed_params="274K"),
            ModelSpec("Hyper", "hyper", (("hyper", (m, 70, 70, 70, 70, 70, _n_theta(1, 33, 33, 33, 33, 1))),
                                         ("target", (1, 33, 33, 33, 33, 1))),
                      "relu", d_hyp, expected_params=268_836, printed_params="268K"),
            ModelSpec("c-Hyper", "chunked_hyper", (("hyper", (m + ADVECTION_CHUNK[1], 128, 128, 128, 128, 128, 1024)),
                                                   ("target", (1, 256, 256, 256, 256, 1))),
                      "relu", d_hyp, chunk=ADVECTION_CHUNK, expected_params=208_544, printed_params="208K"),
        )
    if problem == "burgers":
        return (
            ModelSpec("DeepONet", "deeponet", (("branch", (m, 128, 128, 128, 128)), ("trunk", (1, 128, 128, 128, 128))),
                      "relu", d_dec, expected_params=115_841, printed_params="115K"),
            ModelSpec("Hyper", "hyper", (("hyper", (m, 66, 66, 66, 66, 66, _n_theta(1, 20, 20, 20, 20, 1))),
                                         ("target", (1, 20, 20, 20, 20, 1))),
                      "relu", d_hyp, expected_params=114_709, printed_params="114K"),
            ModelSpec("c-Hyper", "chunked_hyper", (("hyper", (m + BURGERS_CHUNK[1], 66, 66, 66, 66, 66, 512)),
                                                   ("target", (1, 128, 128, 128, 128, 1))),
                      "relu", d_hyp, chunk=BURGERS_CHUNK, expected_params=61_818, printed_params="115K"),
        )
    raise ValueError(f"same-budget scenario covers advection and burgers, not {problem!r}")


def scenario_same_budget(problem: str) -> ExperimentSpec:
    models = _budget_models(problem)
    return ExperimentSpec(
        name=f"same-budget-{problem}", problem=problem, m=SENSORS[problem], d_y=1, models=models,
        n_train=DESK_TRAIN, n_test=DESK_TEST, epochs=EPOCHS[problem], batch_fraction=1.0,
        reference_errors=REFERENCE_SAME_BUDGET[problem],
        scaling={"n_train": f"{DESK_TRAIN} of {FULL_TRAIN}", "n_test": f"{DESK_TEST} of {FULL_TEST}",
                 "epochs": f"{EPOCHS[problem]} (desk cap)"},
        eval_every=max(1, EPOCHS[problem] // 5),
    )


def shallow_models(small: bool = False) -> tuple[ModelSpec, ...]:
    m, d_y = SENSORS["shallow"], 3
    d_dec, _, _, _, d_hyp = DECAY["shallow"]
    if small:
        return (
            ModelSpec("DeepONet", "deeponet", (("branch", (m, 20, 20, 10)), ("trunk", (d_y, 20, 20, 10))),
                      "tanh", d_dec, expected_params=6_481, printed_params="6.5K"),
            ModelSpec("Hyper", "hyper", (("hyper", (m, 10, 10, 10, _n_theta(d_y, 10, 10, 10, 1))), ("target", (d_y, 10, 10, 10, 1))),
                      "tanh", d_hyp, expected_params=5_771, printed_params="5.7K"),
        )
    return (
        ModelSpec("DeepONet", "deeponet", (("branch", (m, 100, 100, 100, 100)), ("trunk", (d_y, 100, 100, 100, 100))),
                  "tanh", d_dec, expected_params=86_701, printed_params="107K"),
        ModelSpec("Hyper", "hyper", (("hyper", (m, 30, 30, 30, 30, _n_theta(d_y, 30, 30, 30, 30, 1))), ("target", (d_y, 30, 30, 30, 30, 1))),
                  "tanh", d_hyp, expected_params=101_671, printed_params="101K"),
    )


def scenario_shallow(path: str | None = None, small: bool = False) -> ExperimentSpec:
    """Needs an ingested ODNB file (d_y = 3); the run is skipped without one."""
    return ExperimentSpec(
        name="shallow-small" if small else "shallow", problem="shallow", m=SENSORS["shallow"], d_y=3,
        models=shallow_models(small), n_train=100, n_test=20, epochs=EPOCHS["burgers"],
        batch_fraction=1.0, reference_errors=REFERENCE_SAME_BUDGET["shallow-small" if small else "shallow"],
        external_data=path,
        eval_every=max(1, EPOCHS["burgers"] // 5),
    )


SWEEP_TARGETS = ((30, 30, 30), (50, 50))
REFERENCE_SWEEP = {
    ("relu", 30, (30, 30, 30)): {"DeepONet": 0.16797, "Shift": 1.30852, "Flex": 1.04292, "NOMAD": 0.27209, "Hyper": 0.02059},
    ("relu", 30, (50, 50)): {"DeepONet": 0.04822, "Shift": 1.08760, "Flex": 1.11957, "NOMAD": 0.21391, "Hyper": 0.05562},
    ("relu", 100, (30, 30, 30)): {"DeepONet": 0.02234, "Shift": 1.08310, "Flex": 1.03741, "NOMAD": 0.19089, "Hyper": 0.01743},
    ("relu", 100, (50, 50)): {"DeepONet": 0.07255, "Shift": 1.47373, "Flex": 1.13217, "NOMAD": 0.14020, "Hyper": 0.04645},
    ("prelu", 30, (30, 30, 30)): {"DeepONet": 0.11354, "Shift": 1.09395, "Flex": 1.03502, "NOMAD": 0.25651, "Hyper": 0.02844},
    ("prelu", 30, (50, 50)): {"DeepONet": 0.00873, "Shift": 1.14073, "Flex": 1.06947, "NOMAD": 0.04054, "Hyper": 0.04302},
    ("prelu", 100, (30, 30, 30)): {"DeepONet": 0.01035, "Shift": 1.05080, "Flex": 1.07791, "NOMAD": 0.16592, "Hyper": 0.01083},
    ("prelu", 100, (50, 50)): {"DeepONet": 0.07255, "Shift": 1.47373, "Flex": 1.13217, "NOMAD": 0.14020, "Hyper": 0.04645},
}


def _sweep_spec(name, problem, m, models, reference=None) -> ExperimentSpec:
    epochs = EPOCHS["sweep"]
    return ExperimentSpec(
        name=name, problem=problem, m=m, d_y=1, models=models, n_train=DESK_TRAIN, n_test=DESK_TEST,
        epochs=epochs, batch_fraction=0.1, reference_errors=reference or {},
        scaling={"n_train": f"{DESK_TRAIN} of {FULL_TRAIN}", "epochs": f"{epochs} (desk cap)"},
        eval_every=epochs,
    )


def scenario_sweeps() -> list[ExperimentSpec]:
    """Activation x sensor count x target sweeps, then branch/hypernetwork depth 1..5."""
    specs = []
    for act in ("relu", "prelu"):
        for m in (30, 100):
            for hidden in SWEEP_TARGETS:
                tag = "-".join(map(str, hidden))
                specs.append(_sweep_spec(
                    f"sweep-{act}-m{m}-t{tag}", "identity", m,
                    equal_target_models(m, 1, hidden, act, DECAY["identity"]),
                    REFERENCE_SWEEP[(act, m, hidden)]))
    specs.extend(scenario_depth_sweep())
    return specs


def depth_models(m: int, depth: int, decay: tuple) -> tuple[ModelSpec, ...]:
    """DeepONet and Hyper whose branch / hypernetwork have ``depth`` hidden layers of width 20."""
    target = (1, 20, 20, 10, 1)
    n_theta = count_params(MlpSpec(target))
    hidden = (20,) * depth
    return (
        ModelSpec("DeepONet", "deeponet", (("branch", (m, *hidden, 10)), ("trunk", (1, 20, 20, 10))),
                  "tanh", decay[0]),
        ModelSpec("Hyper", "hyper", (("hyper", (m, *hidden, n_theta)), ("target", target)),
                  "tanh", decay[4]),
    )


def scenario_depth_sweep() -> list[ExperimentSpec]:
    return [
        _sweep_spec(f"depth-{problem}-{depth}", problem, SENSORS[problem],
                    depth_models(SENSORS[problem], depth, DECAY[problem]))
        for problem in ("identity", "differentiation")
        for depth in range(1, 6)
    ]


def registry(shallow_path: str | None = None) -> dict[str, ExperimentSpec]:
    specs = [
        scenario_same_target("identity"),
        scenario_same_target("differentiation"),
        scenario_same_budget("advection"),
        scenario_same_budget("burgers"),
        scenario_shallow(shallow_path),
        scenario_shallow(shallow_path, small=True),
        *scenario_sweeps(),
    ]
    return {s.name: s for s in specs}
