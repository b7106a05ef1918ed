"""Prompt assembly for counterexample generation."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from ..subject.render import render_method, render_subject
from .protocol import CODE, FAILED, METHOD, OK, POSTCONDITION, TEST, VERDICT

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.1

ROLE = (
    "You review candidate postconditions for code in a small imperative language. The input "
    "gives the source of a unit, one of its methods and a candidate postcondition for that "
    "method.\n"
    "Work out whether some call of the method can return in a state where the candidate is "
    "false. If no such call exists, answer \"OK\". Otherwise answer \"FAILED\" and supply a "
    "test script that builds an instance, drives it into a suitable state and calls the method "
    "so that the candidate is false when the call returns. You may think aloud first; if "
    "several verdicts appear, the last one counts."
)

HELPERS_DOC = (
    "Helper functions: size(a) is the length of array a; getElement(a, i) is element i of a; "
    "pairwiseEqual(a, b) holds when a and b have the same length and equal elements at every "
    "index; isReverse(a, b) holds when a read backwards equals b; typeArray(a) is the element "
    "type tag of a; old(e) is the value of e when the method was entered."
)

INPUT_FORMAT = (
    "Sections of the input:\n"
    f"- {CODE} the whole unit.\n"
    f"- {METHOD} the method under scrutiny.\n"
    f"- {POSTCONDITION} the candidate. A field name means its value after the call, a "
    "parameter name the argument passed, and result the returned value.\n"
    f"{HELPERS_DOC}"
)

OUTPUT_FORMAT = (
    "Answer format:\n"
    f"- {VERDICT} followed by \"{OK}\" or \"{FAILED}\".\n"
    f"- After {FAILED}, {TEST} followed by the script:\n"
    "    test <name> {\n"
    "      new <Unit>(<constructor arguments>);\n"
    "      <method>(<arguments>);\n"
    "      ...\n"
    "    }\n"
    "  The first statement constructs the single instance. Arguments are integer literals, "
    "true, false or null. Locals such as `int v = m();` and `assert <condition>;` may be "
    "used. Fields cannot be read or written from a test."
)

FEWSHOT_INTRO = "Solved cases, in the layout expected:"

_SECTIONS = (CODE, METHOD, POSTCONDITION, VERDICT, TEST)


@dataclass(frozen=True)
class FewShotExample:
    name: str
    code: str
    method: str
    postcondition: str
    verdict: str
    test: str | None

    def render(self) -> str:
        parts = [f"{CODE}:\n{self.code}", f"{METHOD}:\n{self.method}",
                 f"{POSTCONDITION}:\n{self.postcondition}", f"{VERDICT}:\n{self.verdict}"]
        if self.test is not None:
            parts.append(f"{TEST}:\n{self.test}")
        return "\n".join(parts)


def parse_fewshot(text: str, name: str = "<example>") -> FewShotExample:
    """A few-shot file holds the marker sections in order, each marker followed by ':'."""
    found = {}
    pos = 0
    order = []
    for marker in _SECTIONS:
        at = text.find(marker + ":", pos)
        if at < 0:
            if marker == TEST:
                break
            raise ConfigError(f"{name}: missing {marker} section")
        if text.count(marker + ":") != 1:
            raise ConfigError(f"{name}: {marker} appears more than once")
        order.append((marker, at))
        pos = at + len(marker) + 1
    for i, (marker, at) in enumerate(order):
        end = order[i + 1][1] if i + 1 < len(order) else len(text)
        found[marker] = text[at + len(marker) + 1:end].strip("\n").rstrip()
    verdict = found[VERDICT].strip()
    if verdict not in (OK, FAILED):
        raise ConfigError(f"{name}: verdict must be {OK} or {FAILED}, found {verdict!r}")
    test = found.get(TEST)
    if verdict == FAILED and not test:
        raise ConfigError(f"{name}: a {FAILED} example needs a {TEST} section")
    if verdict == OK and test is not None:
        raise ConfigError(f"{name}: an {OK} example must not carry a {TEST} section")
    for marker in (CODE, METHOD, POSTCONDITION):
        if not found[marker].strip():
            raise ConfigError(f"{name}: empty {marker} section")
    return FewShotExample(name, found[CODE], found[METHOD], found[POSTCONDITION], verdict, test)


def default_fewshot_dir():
    return resources.files("specrefine") / "data" / "fewshot"


def load_fewshot(directory) -> list[FewShotExample]:
    """Every `*.txt` file of `directory`, sorted by file name."""
    path = Path(str(directory))
    if not path.is_dir():
        raise ConfigError(f"few-shot directory {path} does not exist")
    files = sorted(p for p in path.iterdir() if p.suffix == ".txt")
    if not files:
        log.warning("few-shot directory %s is empty; the examples section is omitted", path)
    return [parse_fewshot(p.read_text("utf-8"), p.name) for p in files]


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    temperature: float = DEFAULT_TEMPERATURE
    model_id: str = ""
    # what the prompt is about, for backends that reason on the AST directly
    target: tuple = field(default=(), compare=False, repr=False)

    def digest(self) -> str:
        body = json.dumps([self.system_text, self.user_text, self.temperature, self.model_id])
        return hashlib.sha256(body.encode("utf-8")).hexdigest()

    def messages(self) -> list[dict]:
        return [{"role": "system", "content": self.system_text},
                {"role": "user", "content": self.user_text}]


def system_text(examples) -> str:
    parts = [ROLE, INPUT_FORMAT, OUTPUT_FORMAT]
    if examples:
        parts.append(FEWSHOT_INTRO + "\n\n" + "\n\n".join(e.render() for e in examples))
    return "\n\n".join(parts) + "\n"


def user_text(program, method_name: str, assertion_text: str) -> str:
    return (f"{CODE}:\n{render_subject(program)}"
            f"{METHOD}:\n{render_method(program.method(method_name))}"
            f"{POSTCONDITION}:\n{assertion_text}\n")


def build_prompt(program, method: str, assertion, few_shot_dir=None, *,
                 temperature: float = DEFAULT_TEMPERATURE, model_id: str = "",
                 examples=None) -> PromptBundle:
    if examples is None:
        examples = load_fewshot(few_shot_dir if few_shot_dir is not None else default_fewshot_dir())
    return PromptBundle(system_text(examples), user_text(program, method, assertion.text),
                        temperature, model_id, (program, method, assertion))


def repair_prompt(bundle: PromptBundle, failing_source: str, diagnostics) -> PromptBundle:
    """The original request plus the rejected test and why it was rejected."""
    diag = "\n".join(f"- {d}" for d in diagnostics)
    text = (f"{bundle.user_text}\nYour previous answer gave this test:\n{failing_source.strip()}\n"
            f"It was rejected:\n{diag}\n"
            f"Answer again in the same output layout, with a {TEST} that compiles.\n")
    return PromptBundle(bundle.system_text, text, bundle.temperature, bundle.model_id, bundle.target)
