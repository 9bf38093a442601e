"""Local collection of resource instances believed to exist in the API."""

from __future__ import annotations

import json
import logging
import os
import random
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence, Union

from .errors import GenerationError, PoolExhaustedError, SetupError
from .graph import ExistenceState
from .schema import ResourceInstance, ResourceSchema, generate_instance

log = logging.getLogger(__name__)

MAX_FRESH_ATTEMPTS = 100

# a shell-style command line, an argv list, or an in-process callable
Hook = Union[str, Sequence[str], Callable[[list], None]]


@dataclass
class ResourcePool:
    schema: ResourceSchema
    existing: dict[Any, ResourceInstance] = field(default_factory=dict)
    consumed_ids: set = field(default_factory=set)

    @property
    def resource(self) -> str:
        return self.schema.name

    def __len__(self) -> int:
        return len(self.existing)

    def instances(self) -> list[ResourceInstance]:
        return list(self.existing.values())

    def fresh_instance(self, rng: random.Random) -> ResourceInstance:
        """A generated instance whose id was never seen by this pool."""
        for _ in range(MAX_FRESH_ATTEMPTS):
            inst = generate_instance(self.schema, rng)
            ident = self.schema.id_of(inst)
            if ident not in self.existing and ident not in self.consumed_ids:
                self.consumed_ids.add(ident)
                return inst
        raise GenerationError(
            f"{self.resource}: no unused id after {MAX_FRESH_ATTEMPTS} attempts"
        )


def run_hook(hook: Hook | None, instances: list[ResourceInstance], resource: str, stage: str) -> None:
    """Hand the collection to a user hook; raise ``SetupError`` if it fails."""
    if hook is None:
        return
    payload = [dict(i.values) for i in instances]
    if callable(hook):
        try:
            hook(payload)
        except Exception as exc:
            raise SetupError(f"{stage} hook raised {exc!r}") from exc
        return
    argv = shlex.split(hook) if isinstance(hook, str) else list(hook)
    env = dict(os.environ, NIRIKSHAK_RESOURCE=resource, NIRIKSHAK_STAGE=stage)
    try:
        proc = subprocess.run(
            argv, input=json.dumps(payload), text=True, capture_output=True, env=env
        )
    except OSError as exc:
        raise SetupError(f"{stage} hook could not start: {exc}") from exc
    if proc.returncode != 0:
        raise SetupError(
            f"{stage} hook exited {proc.returncode}: {proc.stderr.strip()[:500]}"
        )


def setup_pool(
    schema: ResourceSchema,
    setup_instances: int,
    rng: random.Random,
    hook: Hook | None = None,
    consumed_ids: set | None = None,
) -> ResourcePool:
    if setup_instances < 1:
        raise ValueError("setup_instances must be >= 1")
    pool = ResourcePool(schema, consumed_ids=consumed_ids if consumed_ids is not None else set())
    for _ in range(setup_instances):
        inst = pool.fresh_instance(rng)
        pool.existing[schema.id_of(inst)] = inst
    run_hook(hook, pool.instances(), schema.name, "setup")
    return pool


def select_resource(
    pool: ResourcePool,
    pre: ExistenceState,
    rng: random.Random,
    replenish: Callable[[], ResourceInstance | None] | None = None,
) -> ResourceInstance:
    """Pick an instance matching the precondition.

    ``replenish`` is asked for a newly created instance when EXISTS is
    required and the pool is empty.
    """
    pre = ExistenceState(pre)
    if pre is ExistenceState.ANY:
        pre = ExistenceState.EXISTS if rng.random() < 0.5 else ExistenceState.MISSING
        if pre is ExistenceState.EXISTS and not pool.existing and replenish is None:
            pre = ExistenceState.MISSING
    if pre is ExistenceState.MISSING:
        return pool.fresh_instance(rng)
    if not pool.existing:
        made = replenish() if replenish is not None else None
        if made is None:
            raise PoolExhaustedError(f"{pool.resource}: no existing instance to select")
        apply_transition(pool, made, ExistenceState.EXISTS)
        return made
    keys = sorted(pool.existing, key=repr)
    inst = pool.existing[keys[rng.randrange(len(keys))]]
    pool.consumed_ids.add(pool.schema.id_of(inst))
    return inst


def apply_transition(pool: ResourcePool, instance: ResourceInstance, post: ExistenceState) -> ResourcePool:
    post = ExistenceState(post)
    if post is ExistenceState.ANY:
        raise ValueError("ANY is not a valid postcondition")
    ident = pool.schema.id_of(instance)
    pool.consumed_ids.add(ident)
    if post is ExistenceState.EXISTS:
        pool.existing[ident] = instance
    else:
        pool.existing.pop(ident, None)
    return pool


def cleanup_pool(pool: ResourcePool, hook: Hook | None = None) -> None:
    """Best effort: hook failures are logged, never raised."""
    try:
        run_hook(hook, pool.instances(), pool.resource, "cleanup")
    except SetupError as exc:
        log.warning("cleanup for %s failed: %s", pool.resource, exc)
    pool.existing.clear()
