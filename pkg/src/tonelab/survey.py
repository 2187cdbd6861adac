"""Survey session planning, task serving, and the append-only rating store.

Each session draws a single seeded generator that fixes the background, the
scale presentation order, the device (image studies), and every task
position, so a plan can be recreated bit-for-bit from its seed. Plans are
persisted before the first task is served and responses are appended one
line per record; replaying the two files reconstructs all session state,
which is how the engine survives restarts.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .color import LabColor, lab_to_srgb
from .ratings import RatingRecord
from .scales import Scale
from .study import ImageStimulus

GRAY_BACKGROUND_LAB = LabColor(50.0, 0.0, 0.0)  # neutral mid gray
WHITE_HEX = "#ffffff"

PROMPTS = {
    "self_palette": "Select the number of the color that best matches your skin tone.",
    "self_text": "Select the description that best matches your skin type.",
    "image": "Select the number of the color that best matches the complexion of the person pictured.",
    "attentional": "Select the number on the scale that matches the color shown.",
    "preference": "Which scale offered a better match to your skin tone?",
}


class UnknownSessionError(KeyError):
    pass


class SessionCompleteError(RuntimeError):
    pass


class StaleTaskError(ValueError):
    """The submitted task is not the session's current task."""


class DuplicateResponseError(ValueError):
    """The task was already answered; the store is unchanged."""


class ResponseRangeError(ValueError):
    """The response is outside the task's legal range."""


@dataclass(frozen=True)
class TaskSpec:
    """One planned survey task; task ids are local to the session."""

    task_id: str
    kind: str  # self | image | preference | attentional
    scale_id: str
    size: int  # legal numeric responses are 1..size
    stimulus_id: str | None = None  # image id, or "swatch:<n>" for attentional
    choices: tuple[str, ...] = ()  # preference only
    device: str | None = None


@dataclass(frozen=True)
class SessionPlan:
    session_id: str
    rater_id: str
    study: int
    background: str  # "white" | "gray"
    scale_order: tuple[str, ...]
    tasks: tuple[TaskSpec, ...]
    seed: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SessionPlan":
        obj = json.loads(line)
        tasks = tuple(
            TaskSpec(**{**t, "choices": tuple(t.get("choices", ()))}) for t in obj.pop("tasks")
        )
        return cls(tasks=tasks, **{**obj, "scale_order": tuple(obj["scale_order"])})


class RatingStore:
    """Append-only line-delimited persistence for plans and responses.

    One record per line; appends are serialized through a lock and flushed
    eagerly so a crash can lose at most the line being written. Reading
    replays both files into plain lists.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.sessions_path = self.directory / "sessions.jsonl"
        self.responses_path = self.directory / "responses.jsonl"
        self._lock = threading.Lock()

    def append_session(self, plan: SessionPlan) -> None:
        self._append(self.sessions_path, plan.to_json())

    def append_response(self, record: RatingRecord) -> None:
        self._append(self.responses_path, record.to_json())

    def _append(self, path: Path, line: str) -> None:
        with self._lock:
            with open(path, "a") as fh:
                fh.write(line + "\n")
                fh.flush()

    def load_sessions(self) -> list[SessionPlan]:
        return [SessionPlan.from_json(l) for l in self._lines(self.sessions_path)]

    def load_responses(self) -> list[RatingRecord]:
        return [RatingRecord.from_json(l) for l in self._lines(self.responses_path)]

    @staticmethod
    def _lines(path: Path) -> list[str]:
        if not path.exists():
            return []
        with open(path) as fh:
            return [l.strip() for l in fh if l.strip()]


@dataclass
class SurveyConfig:
    attentional_index: int = 4
    study2_subject_count: int | None = None  # None: all subjects with stimuli
    backgrounds: tuple[str, ...] = ("white", "gray")
    study2_background: str = "gray"
    fst_scale_id: str = "fst"


def _background_hex(name: str) -> str:
    if name == "white":
        return WHITE_HEX
    rgb, _ = lab_to_srgb(GRAY_BACKGROUND_LAB)
    return rgb.hex


class SurveyEngine:
    """Creates session plans, serves tasks, and validates responses."""

    def __init__(
        self,
        scales: Mapping[str, Scale],
        store: RatingStore,
        stimuli: Sequence[ImageStimulus] = (),
        config: SurveyConfig = SurveyConfig(),
    ):
        self.scales = dict(scales)
        self.store = store
        self.stimuli = list(stimuli)
        self.config = config
        self.palette_ids = [s.scale_id for s in self.scales.values() if s.kind == "palette"]
        self._lock = threading.Lock()
        self._sessions: dict[str, SessionPlan] = {}
        self._answered: dict[str, dict[str, RatingRecord]] = {}
        self._replay()

    def _replay(self) -> None:
        for plan in self.store.load_sessions():
            self._sessions[plan.session_id] = plan
            self._answered.setdefault(plan.session_id, {})
        for record in self.store.load_responses():
            if record.session_id in self._answered and record.task_id:
                self._answered[record.session_id][record.task_id] = record

    # -- planning ----------------------------------------------------------

    def create_session(self, rater_id: str, study: int, seed: int | None = None) -> SessionPlan:
        """Draw and persist a session plan from one seeded generator."""
        if study not in (1, 2):
            raise ValueError(f"study must be 1 or 2, got {study}")
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**63))
        rng = np.random.default_rng(seed)
        session_id = uuid.uuid4().hex[:12]
        if study == 1:
            plan = self._plan_study1(session_id, rater_id, seed, rng)
        else:
            plan = self._plan_study2(session_id, rater_id, seed, rng)
        with self._lock:
            self.store.append_session(plan)
            self._sessions[session_id] = plan
            self._answered[session_id] = {}
        return plan

    def _palette_scales(self) -> list[Scale]:
        scales = [self.scales[i] for i in sorted(self.palette_ids)]
        if not scales:
            raise ValueError("no palette scales loaded")
        return scales

    def _plan_study1(self, session_id, rater_id, seed, rng) -> SessionPlan:
        backgrounds = self.config.backgrounds
        background = backgrounds[int(rng.integers(len(backgrounds)))]
        palettes = self._palette_scales()
        order = [palettes[i].scale_id for i in rng.permutation(len(palettes))]
        tasks: list[TaskSpec] = []
        counter = 0

        def tid() -> str:
            nonlocal counter
            counter += 1
            return f"t{counter:02d}"

        for scale_id in order:
            scale = self.scales[scale_id]
            block = [
                TaskSpec(tid(), "self", scale_id, scale.size),
                TaskSpec(
                    tid(),
                    "attentional",
                    scale_id,
                    scale.size,
                    stimulus_id=f"swatch:{self.config.attentional_index}",
                ),
            ]
            # attentional position randomized within the scale's block
            if rng.random() < 0.5:
                block.reverse()
            tasks.extend(block)
        if len(order) >= 2:
            tasks.append(TaskSpec(tid(), "preference", "preference", 0, choices=tuple(order)))
        fst = self.scales.get(self.config.fst_scale_id)
        if fst is not None:
            tasks.append(TaskSpec(tid(), "self", fst.scale_id, fst.size))
        return SessionPlan(session_id, rater_id, 1, background, tuple(order), tuple(tasks), seed)

    def _plan_study2(self, session_id, rater_id, seed, rng) -> SessionPlan:
        if not self.stimuli:
            raise ValueError("study 2 needs loaded image stimuli")
        palettes = self._palette_scales()
        scale = palettes[int(rng.integers(len(palettes)))]
        by_subject: dict[str, dict[str, ImageStimulus]] = {}
        for s in self.stimuli:
            by_subject.setdefault(s.subject_id, {})[s.device] = s
        subjects = sorted(by_subject)
        if self.config.study2_subject_count is not None:
            subjects = subjects[: self.config.study2_subject_count]
        devices = sorted({s.device for s in self.stimuli})
        device = devices[int(rng.integers(len(devices)))]
        missing = [s for s in subjects if device not in by_subject[s]]
        if missing:
            raise ValueError(f"missing device {device} images for subjects {missing}")

        counter = 0

        def tid() -> str:
            nonlocal counter
            counter += 1
            return f"t{counter:02d}"

        tasks = [
            TaskSpec(
                tid(),
                "image",
                scale.scale_id,
                scale.size,
                stimulus_id=by_subject[str(sid)][device].image_id,
                device=device,
            )
            for sid in rng.permutation(subjects)
        ]
        for _ in range(2):
            check = TaskSpec(
                tid(),
                "attentional",
                scale.scale_id,
                scale.size,
                stimulus_id=f"swatch:{self.config.attentional_index}",
                device=device,
            )
            position = int(rng.integers(len(tasks) + 1))
            tasks.insert(position, check)
        return SessionPlan(
            session_id,
            rater_id,
            2,
            self.config.study2_background,
            (scale.scale_id,),
            tuple(tasks),
            seed,
        )

    # -- serving -----------------------------------------------------------

    def _session(self, session_id: str) -> SessionPlan:
        plan = self._sessions.get(session_id)
        if plan is None:
            raise UnknownSessionError(session_id)
        return plan

    def _pending(self, plan: SessionPlan) -> TaskSpec | None:
        answered = self._answered[plan.session_id]
        for task in plan.tasks:
            if task.task_id not in answered:
                return task
        return None

    def next_task(self, session_id: str) -> dict:
        """The next unanswered task as a serializable view; idempotent."""
        plan = self._session(session_id)
        task = self._pending(plan)
        if task is None:
            return {
                "done": True,
                "session_id": session_id,
                "completed": len(plan.tasks),
            }
        return self._task_view(plan, task)

    def _task_view(self, plan: SessionPlan, task: TaskSpec) -> dict:
        view: dict = {
            "done": False,
            "session_id": plan.session_id,
            "task_id": task.task_id,
            "kind": task.kind,
            "scale_id": task.scale_id,
            "background": {"name": plan.background, "hex": _background_hex(plan.background)},
            "progress": {
                "answered": len(self._answered[plan.session_id]),
                "total": len(plan.tasks),
            },
        }
        if task.kind == "preference":
            view["prompt"] = PROMPTS["preference"]
            view["choices"] = list(task.choices)
            return view
        scale = self.scales[task.scale_id]
        if scale.kind == "text":
            view["prompt"] = PROMPTS["self_text"]
            view["options"] = list(scale.items)
            return view
        view["swatches"] = [{"index": s.index, "hex": s.srgb_hex} for s in scale.swatches]
        if task.kind == "self":
            view["prompt"] = PROMPTS["self_palette"]
        elif task.kind == "image":
            view["prompt"] = PROMPTS["image"]
            view["image"] = f"/images/{task.stimulus_id}"
        else:
            view["prompt"] = PROMPTS["attentional"]
            index = int(str(task.stimulus_id).rpartition(":")[-1])
            view["target_hex"] = scale.swatch(index).srgb_hex
        return view

    # -- responses ---------------------------------------------------------

    def submit_response(self, session_id: str, task_id: str, response) -> RatingRecord:
        """Validate and persist one response; exactly once per task."""
        with self._lock:
            plan = self._session(session_id)
            answered = self._answered[session_id]
            if task_id in answered:
                raise DuplicateResponseError(f"task {task_id} already answered")
            current = self._pending(plan)
            if current is None:
                raise SessionCompleteError(f"session {session_id} is complete")
            if current.task_id != task_id:
                known = {t.task_id for t in plan.tasks}
                if task_id not in known:
                    raise StaleTaskError(f"unknown task {task_id}")
                raise StaleTaskError(
                    f"task {task_id} is not current (current is {current.task_id})"
                )
            value = self._validate(current, response)
            record = RatingRecord(
                rater_id=plan.rater_id,
                session_id=session_id,
                scale_id=current.scale_id,
                kind=current.kind,
                response=value,
                stimulus_id=current.stimulus_id,
                background=plan.background,
                presentation_order=list(plan.tasks).index(current) + 1,
                timestamp=_now_iso(),
                task_id=task_id,
            )
            self.store.append_response(record)
            answered[task_id] = record
            return record

    @staticmethod
    def _validate(task: TaskSpec, response) -> int | str:
        if task.kind == "preference":
            if response not in task.choices:
                raise ResponseRangeError(
                    f"response {response!r} not one of {list(task.choices)}"
                )
            return str(response)
        if isinstance(response, bool) or not isinstance(response, (int, float)):
            raise ResponseRangeError(f"response {response!r} must be an integer")
        if float(response) != int(response):
            raise ResponseRangeError(f"response {response!r} must be a whole number")
        value = int(response)
        if not 1 <= value <= task.size:
            raise ResponseRangeError(f"response {value} outside 1..{task.size}")
        return value


def _now_iso() -> str:
    import datetime

    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")
