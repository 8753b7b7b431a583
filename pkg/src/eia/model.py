"""Backend models: a variable assignment plus values for exp applications."""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import DEFAULT_EXP_CAP, Evaluator, Term, Value, eia_pow_equals


@dataclass
class ModelView:
    """A NIA model in which ``exp`` is uninterpreted.

    ``exp_values`` holds the backend's value for each queried exp application.
    Evaluation through :meth:`value` uses those values rather than the EIA
    meaning of ``exp``.
    """

    assignment: dict[str, Value] = field(default_factory=dict)
    exp_values: dict[Term, int] = field(default_factory=dict)
    cap: int = DEFAULT_EXP_CAP

    def __post_init__(self):
        self._eval = Evaluator(self.assignment, self.exp_values, self.cap)

    def value(self, t: Term) -> Value:
        return self._eval(t)

    def satisfies(self, phi: Term) -> bool:
        return bool(self._eval(phi))

    def is_faithful(self, e: Term) -> bool:
        """Does the model's value of ``e = exp(s, t)`` match ``s ** |t|``?"""
        s, t = e.args
        return eia_pow_equals(self.exp_values[e], self.value(s), self.value(t), self.cap)


def detect_counterexample(exp_terms, model: ModelView) -> list[Term]:
    """The exp applications whose model value disagrees with exponentiation.

    An empty result means ``model`` is a genuine EIA model of any formula whose
    exp applications are all among ``exp_terms``.
    """
    return [e for e in exp_terms if not model.is_faithful(e)]
