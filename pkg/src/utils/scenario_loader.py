import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..dither.dither_plan import DitherPlan, to_fraction
from ..errors import InvalidMarket, InvalidParameters, ParseError, SingularHessian, ValidationError
from ..game.quadratic_game import PlayerPayoff, QuadraticGame, duopoly_from_market
from ..sim.scenario import Integrator, Mode, ScenarioConfig
from ..trigger.event_trigger import TriggerPolicy

logger = logging.getLogger(__name__)

PAYOFF_FIELDS = ("own_quad", "other_quad", "cross", "lin_own", "lin_other", "offset")
MARKET_FIELDS = ("S_d", "p", "m1", "m2")


def _require(block: Dict[str, Any], key: str, field: str) -> Any:
    if not isinstance(block, dict):
        raise ValidationError(field.rsplit(".", 1)[0], "must be an object")
    if key not in block:
        raise ValidationError(field, "missing")
    return block[key]


def _number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(field, f"must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(field, f"must be finite, got {value!r}")
    return float(value)


def _rational(value: Any, field: str):
    """A number or an exact [numerator, denominator] pair."""
    if isinstance(value, list):
        if len(value) != 2 or not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
            raise ValidationError(field, f"rational pairs need two integers, got {value!r}")
        if value[1] == 0:
            raise ValidationError(field, "zero denominator")
        return to_fraction(value)
    return to_fraction(_number(value, field))


def _pair(value: Any, field: str) -> List[Any]:
    if not isinstance(value, list) or len(value) != 2:
        raise ValidationError(field, f"must be a list of two entries, got {value!r}")
    return value


def _parse_game(block: Any) -> QuadraticGame:
    if not isinstance(block, dict):
        raise ValidationError("game", "must be an object")
    if "market" in block:
        market = block["market"]
        values = {key: _number(_require(market, key, f"game.market.{key}"), f"game.market.{key}")
                  for key in MARKET_FIELDS}
        try:
            game = duopoly_from_market(**values)
        except InvalidMarket as e:
            raise ValidationError("game.market.p", str(e)) from e
    else:
        players = []
        for name in ("p1", "p2"):
            coeffs = _require(block, name, f"game.{name}")
            players.append(PlayerPayoff(**{
                key: _number(_require(coeffs, key, f"game.{name}.{key}"), f"game.{name}.{key}")
                for key in PAYOFF_FIELDS
            }))
        game = QuadraticGame(p1=players[0], p2=players[1])

    try:
        game.validate()
    except (InvalidParameters, SingularHessian) as e:
        raise ValidationError("game", str(e)) from e
    return game


def _parse_dither(block: Any) -> DitherPlan:
    amplitudes = [_number(a, "dither.amplitudes") for a in _pair(_require(block, "amplitudes", "dither.amplitudes"),
                                                                   "dither.amplitudes")]
    if not all(a > 0 for a in amplitudes):
        raise ValidationError("dither.amplitudes", f"must be positive, got {amplitudes}")
    frequencies = [_rational(w, "dither.frequencies")
                   for w in _pair(_require(block, "frequencies", "dither.frequencies"), "dither.frequencies")]
    if not all(w > 0 for w in frequencies):
        raise ValidationError("dither.frequencies", f"must be positive, got {[str(w) for w in frequencies]}")
    if frequencies[0] == frequencies[1]:
        raise ValidationError("dither.frequencies", f"must be distinct, got {frequencies[0]} twice")
    return DitherPlan(a=tuple(amplitudes), omega=tuple(frequencies))


def _parse_policy(block: Any) -> TriggerPolicy:
    sigma = [_number(s, "trigger.sigma") for s in _pair(_require(block, "sigma", "trigger.sigma"), "trigger.sigma")]
    if not all(0.0 < s < 1.0 for s in sigma):
        raise ValidationError("trigger.sigma", f"must lie in (0, 1), got {sigma}")
    return TriggerPolicy(sigma=tuple(sigma))


def _parse_simulation(block: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    block = block or {}
    if not isinstance(block, dict):
        raise ValidationError("simulation", "must be an object")
    options: Dict[str, Any] = {}
    for key in ("dt", "t_final"):
        if key in block:
            options[key] = _number(block[key], f"simulation.{key}")
    if block.get("baseline_h") is not None:
        options["baseline_h"] = _number(block["baseline_h"], "simulation.baseline_h")
    if "record_stride" in block:
        stride = block["record_stride"]
        if isinstance(stride, bool) or not isinstance(stride, int):
            raise ValidationError("simulation.record_stride", f"must be an integer, got {stride!r}")
        options["record_stride"] = stride
    if "continuous_control" in block:
        options["continuous_control"] = bool(block["continuous_control"])
    for key, enum in (("mode", Mode), ("integrator", Integrator)):
        if key in block:
            try:
                options[key] = enum(block[key])
            except ValueError as e:
                allowed = ", ".join(m.value for m in enum)
                raise ValidationError(f"simulation.{key}", f"must be one of {allowed}, got {block[key]!r}") from e
    return options


def parse_scenario(raw: Any, default_name: str = "scenario") -> ScenarioConfig:
    """Build and validate a ScenarioConfig from decoded JSON.

    Raises:
        ValidationError: Naming the first offending field
    """
    if not isinstance(raw, dict):
        raise ValidationError("scenario", "top level must be an object")

    gains = [_number(k, "gains") for k in _pair(_require(raw, "gains", "gains"), "gains")]
    theta_hat0 = [float(_rational(x, "theta_hat0")) for x in _pair(_require(raw, "theta_hat0", "theta_hat0"),
                                                                      "theta_hat0")]
    reference: Optional[Tuple[float, float]] = None
    if raw.get("reference_payoff") is not None:
        reference = tuple(_number(x, "reference_payoff") for x in _pair(raw["reference_payoff"], "reference_payoff"))

    config = ScenarioConfig(
        game=_parse_game(_require(raw, "game", "game")),
        dither=_parse_dither(_require(raw, "dither", "dither")),
        policy=_parse_policy(_require(raw, "trigger", "trigger")),
        gains=tuple(gains),
        theta_hat0=tuple(theta_hat0),
        name=str(raw.get("name", default_name)),
        reference_payoff=reference,
        **_parse_simulation(raw.get("simulation")),
    )
    config.validate()
    return config


def load_scenario(path) -> ScenarioConfig:
    """Read a scenario JSON file.

    Args:
        path: Path to the scenario file

    Returns:
        Parsed and validated ScenarioConfig

    Raises:
        ParseError: If the file is not valid JSON
        ValidationError: If a field violates an invariant
        OSError: If the file cannot be read
    """
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    config = parse_scenario(raw, default_name=path.stem)
    logger.debug("Loaded scenario %s from %s", config.name, path)
    return config


class ScenarioLoader:
    """Access to the bundled scenario files."""

    def __init__(self, data_dir: str = "data/scenarios"):
        self.data_dir = Path(data_dir)

    def list_scenarios(self) -> List[str]:
        return sorted(p.stem for p in self.data_dir.glob("*.json"))

    def load(self, name: str) -> ScenarioConfig:
        """Load a bundled scenario by name.

        Raises:
            KeyError: If no such scenario exists
        """
        path = self.data_dir / f"{name}.json"
        if not path.exists():
            available = ', '.join(self.list_scenarios())
            raise KeyError(f"Scenario '{name}' not found. Available: {available}")
        return load_scenario(path)
