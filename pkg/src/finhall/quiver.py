"""Model configuration: an acyclic quiver over F_q with weights, framing and box.

The on-disk format is a single JSON object::

    {
      "version": 1,
      "quiver": {"vertices": [1, 2], "arrows": [[1, 2]]},
      "field": {"q": 2},
      "exceptional": [2],
      "weights": {"theta": [-1, 1], "h": [1, 0], "l": [1, 1]},
      "framing": [1, 1],
      "box": {"total_max": 5},
      "seed": 0
    }

``framing`` is either a list of multiplicities ``m_v`` (the projective
``W = sum_v P_v^{m_v}``) or ``{"rep": {"dims": [...], "matrices": [...]}}``
for an arbitrary representation (one matrix per arrow, rows = target dim).
Unknown keys anywhere are errors.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .field import GF, factor_prime_power
from .series import TruncationBox

CONFIG_VERSION = 1
DEFAULT_ALLOWED_Q = frozenset({2, 3, 4, 5})

_TOP_KEYS = {"version", "name", "quiver", "field", "exceptional", "weights", "framing", "box", "seed"}
_REQUIRED_KEYS = {"quiver", "field", "exceptional", "weights"}


@dataclass(frozen=True)
class Rep:
    """A representation: a vector space dimension per vertex, a matrix per arrow.

    Arrow ``a: u -> v`` carries a ``dims[v] x dims[u]`` matrix.
    """

    dims: tuple
    matrices: tuple

    def __post_init__(self):
        mats = []
        for m in self.matrices:
            m = np.asarray(m, dtype=np.int64)
            m.setflags(write=False)
            mats.append(m)
        object.__setattr__(self, "matrices", tuple(mats))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def check(self, arrows, field: GF):
        if len(self.matrices) != len(arrows):
            raise ConfigError(f"representation has {len(self.matrices)} matrices for {len(arrows)} arrows")
        for i, ((u, v), m) in enumerate(zip(arrows, self.matrices)):
            if m.shape != (self.dims[v], self.dims[u]):
                raise ConfigError(f"arrow {i}: matrix shape {m.shape} != ({self.dims[v]}, {self.dims[u]})")
            if m.size and (m.min() < 0 or m.max() >= field.q):
                raise ConfigError(f"arrow {i}: entries must lie in 0..{field.q - 1}")

    def flat(self):
        """Matrix entries in arrow order, row-major (the canonical digit string)."""
        if not self.matrices:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([m.reshape(-1) for m in self.matrices])

    def to_json(self):
        return {"dims": list(self.dims), "matrices": [m.tolist() for m in self.matrices]}

    def __eq__(self, other):
        return (
            isinstance(other, Rep)
            and self.dims == other.dims
            and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))
        )

    def __hash__(self):
        return hash((self.dims, self.flat().tobytes()))


def zero_rep(nverts: int, arrows) -> Rep:
    return Rep((0,) * nverts, tuple(np.zeros((0, 0), dtype=np.int64) for _ in arrows))


def topological_order(nverts: int, arrows):
    """Kahn's algorithm; returns None when the quiver has an oriented cycle."""
    indeg = [0] * nverts
    out = [[] for _ in range(nverts)]
    for u, v in arrows:
        indeg[v] += 1
        out[u].append(v)
    ready = [v for v in range(nverts) if indeg[v] == 0]
    order = []
    while ready:
        u = ready.pop(0)
        order.append(u)
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return order if len(order) == nverts else None


def projective_rep(nverts: int, arrows, vertex: int) -> Rep:
    """The indecomposable projective P_v: basis of (P_v)_u = paths v -> u."""
    paths = {u: [] for u in range(nverts)}
    paths[vertex].append(())
    frontier = [()]
    ends = {(): vertex}
    while frontier:
        nxt = []
        for p in frontier:
            for ai, (u, w) in enumerate(arrows):
                if u == ends[p]:
                    np_ = p + (ai,)
                    ends[np_] = w
                    paths[w].append(np_)
                    nxt.append(np_)
        frontier = nxt
    dims = tuple(len(paths[u]) for u in range(nverts))
    mats = []
    for ai, (u, w) in enumerate(arrows):
        m = np.zeros((dims[w], dims[u]), dtype=np.int64)
        for j, p in enumerate(paths[u]):
            m[paths[w].index(p + (ai,)), j] = 1
        mats.append(m)
    return Rep(dims, tuple(mats))


def direct_sum(reps: Sequence[Rep], nverts: int, arrows) -> Rep:
    if not reps:
        return zero_rep(nverts, arrows)
    dims = tuple(sum(r.dims[v] for r in reps) for v in range(nverts))
    mats = []
    for ai, (u, w) in enumerate(arrows):
        m = np.zeros((dims[w], dims[u]), dtype=np.int64)
        ro = co = 0
        for r in reps:
            blk = r.matrices[ai]
            m[ro : ro + blk.shape[0], co : co + blk.shape[1]] = blk
            ro += blk.shape[0]
            co += blk.shape[1]
        mats.append(m)
    return Rep(dims, tuple(mats))


@dataclass(frozen=True)
class Framing:
    """The framing object W: projective multiplicities, or an explicit representation."""

    multiplicities: Optional[tuple] = None
    rep: Optional[Rep] = None

    @property
    def is_projective(self) -> bool:
        return self.multiplicities is not None

    def build(self, nverts: int, arrows) -> Rep:
        if self.rep is not None:
            return self.rep
        summands = []
        for v, m in enumerate(self.multiplicities):
            summands.extend([projective_rep(nverts, arrows, v)] * m)
        return direct_sum(summands, nverts, arrows)

    def to_json(self):
        if self.rep is not None:
            return {"rep": self.rep.to_json()}
        return list(self.multiplicities)


@dataclass(frozen=True)
class ModelConfig:
    vertices: tuple
    arrows: tuple  # (source index, target index)
    q: int
    poly: Optional[tuple]
    exceptional: frozenset  # vertex indices
    theta: tuple
    h_weights: tuple
    l_weights: tuple
    framing: Framing
    box: TruncationBox
    seed: int = 0
    name: str = ""
    _field: GF = dc_field(default=None, compare=False, repr=False)

    @property
    def nverts(self) -> int:
        return len(self.vertices)

    @property
    def field(self) -> GF:
        if self._field is None:
            object.__setattr__(self, "_field", GF(self.q, self.poly))
        return self._field

    def vertex_index(self, v) -> int:
        return self.vertices.index(v)

    def framing_rep(self) -> Rep:
        return self.framing.build(self.nverts, self.arrows)

    def euler_form(self, d, e) -> int:
        """<d, e> = sum_v d_v e_v - sum_{a: u -> v} d_u e_v."""
        return sum(x * y for x, y in zip(d, e)) - sum(d[u] * e[v] for u, v in self.arrows)

    def to_json(self):
        out = {
            "version": CONFIG_VERSION,
            "name": self.name,
            "quiver": {
                "vertices": list(self.vertices),
                "arrows": [[self.vertices[u], self.vertices[v]] for u, v in self.arrows],
            },
            "field": {"q": self.q} if self.poly is None else {"q": self.q, "poly": list(self.poly)},
            "exceptional": [self.vertices[v] for v in sorted(self.exceptional)],
            "weights": {"theta": list(self.theta), "h": list(self.h_weights), "l": list(self.l_weights)},
            "framing": self.framing.to_json(),
            "box": self.box.to_json(),
            "seed": self.seed,
        }
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def replace(self, **changes) -> "ModelConfig":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__ if f != "_field"}
        data.update(changes)
        return ModelConfig(**data)


def _check_keys(obj, allowed, where, diags):
    if not isinstance(obj, dict):
        diags.append(f"{where}: expected an object")
        return False
    for k in sorted(set(obj) - set(allowed)):
        diags.append(f"{where}: unknown key {k!r}")
    return True


def _int_list(x, where, diags):
    if not isinstance(x, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in x):
        diags.append(f"{where}: expected a list of integers")
        return None
    return tuple(x)


def parse_box(obj, nverts, diags, where="box") -> Optional[TruncationBox]:
    if not _check_keys(obj, {"beta_max", "total_max"}, where, diags):
        return None
    beta_max = obj.get("beta_max")
    total = obj.get("total_max")
    if beta_max is None and total is None:
        diags.append(f"{where}: needs beta_max and/or total_max")
        return None
    if beta_max is not None:
        beta_max = _int_list(beta_max, f"{where}.beta_max", diags)
        if beta_max is None:
            return None
        if len(beta_max) != nverts or min(beta_max, default=0) < 0:
            diags.append(f"{where}.beta_max: need {nverts} non-negative entries")
            return None
    if total is not None and (not isinstance(total, int) or total < 0):
        diags.append(f"{where}.total_max: expected a non-negative integer")
        return None
    if beta_max is None:
        beta_max = (total,) * nverts
    return TruncationBox(beta_max=beta_max, total_max=total)


def parse_box_spec(text: str, nverts: int) -> TruncationBox:
    """CLI box syntax: ``T`` (total), ``a,b,c`` (componentwise) or ``a,b,c:T``."""
    text = text.strip()
    try:
        if ":" in text:
            comp, total = text.split(":")
            return TruncationBox(beta_max=tuple(int(x) for x in comp.split(",")), total_max=int(total))
        if "," in text or nverts == 1:
            beta = tuple(int(x) for x in text.split(","))
            if len(beta) != nverts:
                raise ConfigError(f"--box: need {nverts} components, got {len(beta)}")
            return TruncationBox(beta_max=beta)
        t = int(text)
        return TruncationBox(beta_max=(t,) * nverts, total_max=t)
    except ValueError as exc:
        raise ConfigError(f"--box: cannot parse {text!r}") from exc


def model_from_dict(data, *, validate=True, allowed_q=DEFAULT_ALLOWED_Q) -> ModelConfig:
    """Build a :class:`ModelConfig`, collecting a diagnostic per violated invariant.

    ``validate=False`` skips the *stability* invariants (theta on S, h/l signs)
    so that negative controls can be constructed; structural errors still raise.
    """
    diags = []
    if not _check_keys(data, _TOP_KEYS, "config", diags):
        raise ConfigError(diags)
    for k in sorted(_REQUIRED_KEYS - set(data)):
        diags.append(f"config: missing key {k!r}")
    if diags:
        raise ConfigError(diags)
    if data.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        diags.append(f"config: unsupported version {data.get('version')!r}")

    quiver = data["quiver"]
    _check_keys(quiver, {"vertices", "arrows"}, "quiver", diags)
    vertices = quiver.get("vertices") if isinstance(quiver, dict) else None
    if not isinstance(vertices, list) or not vertices or len(set(map(str, vertices))) != len(vertices):
        raise ConfigError(diags + ["quiver.vertices: need a non-empty list of distinct ids"])
    vertices = tuple(vertices)
    arrows = []
    for i, a in enumerate(quiver.get("arrows", [])):
        if not (isinstance(a, list) and len(a) == 2 and a[0] in vertices and a[1] in vertices):
            diags.append(f"quiver.arrows[{i}]: expected [source, target] over known vertices")
            continue
        arrows.append((vertices.index(a[0]), vertices.index(a[1])))
    arrows = tuple(arrows)
    n = len(vertices)
    if topological_order(n, arrows) is None:
        diags.append("quiver: has an oriented cycle (acyclic quivers only)")

    fld = data["field"]
    q, poly = None, None
    if _check_keys(fld, {"q", "poly"}, "field", diags):
        q = fld.get("q")
        if not isinstance(q, int) or factor_prime_power(q) is None:
            diags.append(f"field.q: {q!r} is not a prime power")
            q = None
        elif q not in allowed_q:
            diags.append(f"field.q: {q} outside the allowed set {sorted(allowed_q)}")
        if fld.get("poly") is not None:
            poly = _int_list(fld["poly"], "field.poly", diags)

    exc = data["exceptional"]
    S = frozenset()
    if not isinstance(exc, list) or any(v not in vertices for v in exc):
        diags.append("exceptional: expected a list of known vertices")
    else:
        S = frozenset(vertices.index(v) for v in exc)

    w = data["weights"]
    theta = h = l = None
    if _check_keys(w, {"theta", "h", "l"}, "weights", diags):
        for key in ("theta", "h", "l"):
            if key not in w:
                diags.append(f"weights: missing {key!r}")
        theta = _int_list(w.get("theta", []), "weights.theta", diags)
        h = _int_list(w.get("h", []), "weights.h", diags)
        l = _int_list(w.get("l", []), "weights.l", diags)
        for key, vec in (("theta", theta), ("h", h), ("l", l)):
            if vec is not None and len(vec) != n:
                diags.append(f"weights.{key}: need {n} entries, got {len(vec)}")
    if validate and theta and h and l and len(theta) == len(h) == len(l) == n:
        for v in range(n):
            name = vertices[v]
            if v in S and theta[v] < 0:
                diags.append(f"weights.theta[{name}]={theta[v]} < 0 on exceptional vertex")
            if h[v] < 0:
                diags.append(f"weights.h[{name}]={h[v]} < 0")
            if (h[v] == 0) != (v in S):
                diags.append(f"weights.h[{name}]={h[v]}: must vanish exactly on the exceptional set")
            if l[v] <= 0:
                diags.append(f"weights.l[{name}]={l[v]} must be > 0")

    framing = Framing(multiplicities=(1,) * n)
    fr = data.get("framing")
    if isinstance(fr, list):
        m = _int_list(fr, "framing", diags)
        if m is not None:
            if len(m) != n or min(m, default=0) < 0:
                diags.append(f"framing: need {n} non-negative multiplicities")
            else:
                framing = Framing(multiplicities=m)
    elif isinstance(fr, dict):
        if _check_keys(fr, {"rep"}, "framing", diags) and "rep" in fr:
            r = fr["rep"]
            if _check_keys(r, {"dims", "matrices"}, "framing.rep", diags):
                try:
                    rep = Rep(tuple(r["dims"]), tuple(np.array(m, dtype=np.int64).reshape(
                        r["dims"][arrows[i][1]], r["dims"][arrows[i][0]]) for i, m in enumerate(r["matrices"])))
                    if q is not None:
                        rep.check(arrows, GF(q, poly))
                    framing = Framing(rep=rep)
                except (KeyError, ValueError, IndexError, TypeError) as exc:
                    diags.append(f"framing.rep: malformed ({exc})")
                except ConfigError as exc:
                    diags.extend(f"framing.rep: {d}" for d in exc.diagnostics)
    elif fr is not None:
        diags.append("framing: expected a multiplicity list or {'rep': ...}")

    box = parse_box(data.get("box", {"total_max": 3}), n, diags)
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        diags.append("seed: expected an integer")
    name = data.get("name", "")
    if diags:
        raise ConfigError(diags)
    if poly is not None:
        GF(q, poly)  # validates irreducibility
    return ModelConfig(
        vertices=vertices,
        arrows=arrows,
        q=q,
        poly=poly,
        exceptional=S,
        theta=theta,
        h_weights=h,
        l_weights=l,
        framing=framing,
        box=box,
        seed=seed,
        name=name,
    )


def load_model(path, **kwargs) -> ModelConfig:
    """Read and validate a JSON model file."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return model_from_dict(data, **kwargs)


def a2_model(q=2, total_max=5, **overrides) -> dict:
    """Config dict for the 1 -> 2 model used throughout the tests and docs."""
    data = {
        "version": 1,
        "name": f"A2-q{q}",
        "quiver": {"vertices": [1, 2], "arrows": [[1, 2]]},
        "field": {"q": q},
        "exceptional": [2],
        "weights": {"theta": [-1, 1], "h": [1, 0], "l": [1, 1]},
        "framing": [1, 1],
        "box": {"total_max": total_max},
        "seed": 0,
    }
    data.update(overrides)
    return data


def a3_model(q=2, comp_max=2, **overrides) -> dict:
    """Config dict for the 1 -> 2 -> 3 model with exceptional sink {3}."""
    data = {
        "version": 1,
        "name": f"A3-q{q}",
        "quiver": {"vertices": [1, 2, 3], "arrows": [[1, 2], [2, 3]]},
        "field": {"q": q},
        "exceptional": [3],
        "weights": {"theta": [-2, 1, 1], "h": [2, 1, 0], "l": [2, 2, 1]},
        "framing": [1, 1, 1],
        "box": {"beta_max": [comp_max] * 3},
        "seed": 0,
    }
    data.update(overrides)
    return data
