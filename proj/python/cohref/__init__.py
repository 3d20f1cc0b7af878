"""Clarification dialogues about color patches: parsing, evaluation, training and sessions."""

import json
import os
from pathlib import Path

from ._cohref import CohrefError, Engine as _Engine, Sessions as _Sessions

__all__ = ["CohrefError", "Engine", "Sessions", "default_data_dir"]


def default_data_dir():
    """$COHREF_DATA, else the copy shipped with the package, else the source checkout's."""
    env = os.environ.get("COHREF_DATA")
    if env:
        return Path(env)
    here = Path(__file__).resolve().parent
    shipped = here / "data"
    if shipped.is_dir():
        return shipped
    return here.parent.parent / "data"


def _model_text(model):
    if model is None:
        return None
    if isinstance(model, (str, os.PathLike)) and Path(model).is_file():
        return Path(model).read_text()
    if isinstance(model, dict):
        return json.dumps(model)
    return model


class Engine:
    """Lexicon plus grammar. Results come back as plain Python data."""

    def __init__(self, data_dir=None, lexicon=None, grammar=None):
        base = Path(data_dir) if data_dir else default_data_dir()
        lexicon = Path(lexicon) if lexicon else base / "lexicon.jsonl"
        if grammar is None and (base / "grammar.txt").is_file():
            grammar = base / "grammar.txt"
        self._engine = _Engine(str(lexicon), str(grammar) if grammar else None)

    def parse(self, utterance):
        return json.loads(self._engine.parse(utterance))

    def evaluate(self, formula, patches, target=None):
        """Posterior over the three patches; each patch is (hue, sat, light)."""
        ctx = {"patches": [{"hue": h, "sat": s, "light": l} for h, s, l in patches]}
        if target is not None:
            ctx["target"] = target
        return self._engine.evaluate(formula, json.dumps(ctx))

    def train(self, **config):
        return json.loads(self._engine.train(json.dumps(config)))

    def evaluate_policy(self, model=None, p_x=0.4, mode="mixed", episodes=400, seed=1):
        return json.loads(self._engine.evaluate_policy(_model_text(model), p_x, mode, episodes, seed))

    def histogram(self, model=None, p_x=0.5, mode="mixed", count=1000, seed=1):
        return json.loads(self._engine.histogram(_model_text(model), p_x, mode, count, seed))

    def corpus_eval(self, csv_text):
        return json.loads(self._engine.corpus_eval(csv_text))

    def synthetic_corpus(self, rows=200, seed=1, mode="mixed"):
        return self._engine.synthetic_corpus(rows, seed, mode)


class Sessions:
    """Wire-protocol session manager: send dict messages, get dict replies."""

    def __init__(self, engine, model=None, seed=1, mode="mixed", records=None):
        self._sessions = _Sessions(engine._engine, _model_text(model), seed, mode,
                                   str(records) if records else None)

    def handle(self, message):
        return json.loads(self._sessions.handle(json.dumps(message)))

    def __len__(self):
        return len(self._sessions)
