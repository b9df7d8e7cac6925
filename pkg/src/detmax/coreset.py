"""Composable coreset constructions and their exchange certificates.

The building block is the peeling construction: run local search on the
working set, set the layer aside, delete it from the working set, and
repeat up to a threshold number of times.  Layers are disjoint by
construction, so any feasible selection that touches the working set in at
most ``threshold`` elements must miss at least one layer entirely; that
missed layer supplies a replacement element whose reweighted objective
``mu_tilde`` does not decrease (see :func:`find_value_preserving_exchange`).
Iterating the replacement walks any selection into the coreset while the
reweighted objective never drops, which is what makes the union of
per-machine coresets lose at most the factor (zeta*ell)**(2*ell) in the
plain objective.

Three constraint shapes are covered:

* cardinality: one peeling run (or a single local optimum when k <= d),
* partition: one peeling run per group with that group's cap as threshold
  (or one local optimum per group when k <= d),
* laminar: a recursion that peels each maximal family set, and for every
  selected element descends into the largest proper family set around it.

Coreset sizes are hard-asserted at construction: s*k in the low-rank
regime, k*ell for partitions in the high-rank regime, (k*ell)**r for
laminar families with cover number r.
"""

import math
from dataclasses import dataclass

from .errors import PreconditionError, UnknownIdError
from .localsearch import DEFAULT_ZETA, local_opt
from .objective import REGIME_HIGHK, REGIME_LOWK, WeightProfile, mu_tilde


@dataclass(frozen=True)
class PeelingCoreset:
    """Disjoint local-search layers peeled from one working set."""

    source: tuple
    threshold: int
    ell: int
    zeta: float
    layers: tuple

    @property
    def union(self):
        out = set()
        for layer in self.layers:
            out.update(layer.ids)
        return frozenset(out)

    @property
    def layer_sets(self):
        return tuple(layer.id_set for layer in self.layers)


def peeling_coreset(points, V, threshold, ell, zeta=DEFAULT_ZETA):
    """Peel up to ``threshold`` disjoint local optima out of V.

    Stops early once V is exhausted; the theoretical size bound
    threshold*ell is asserted either way.  Layers whose working set had
    deficient rank come back flagged degenerate but still count as layers.
    """
    if not isinstance(threshold, int) or threshold < 1:
        raise PreconditionError("threshold must be a positive int, got %r" % (threshold,))
    remaining = set(V)
    layers = []
    for _ in range(threshold):
        if not remaining:
            break
        res = local_opt(points, remaining, ell, zeta)
        layers.append(res)
        remaining -= res.id_set
    pc = PeelingCoreset(tuple(sorted(set(V))), threshold, ell, zeta, tuple(layers))
    union = pc.union
    assert len(union) == sum(len(l.ids) for l in layers), "peeling layers must be disjoint"
    assert len(union) <= threshold * ell, "peeling size bound violated"
    return pc


@dataclass(frozen=True)
class LaminarNodeCoreset:
    """Coreset of one family set: peeled layers plus recursed child nodes.

    ``removed`` holds, per layer, the full id-set deleted from the working
    set after that layer: the layer's own loose elements plus every child
    family set a layer element belonged to (the whole set, not just its
    part inside V, because the exchange argument needs selections to avoid
    those sets globally).
    """

    set_ids: frozenset
    cap: int
    layers: tuple
    removed: tuple
    children: tuple

    def collect_ids(self):
        out = set()
        for layer in self.layers:
            out.update(layer.ids)
        for child in self.children:
            out.update(child.collect_ids())
        return out


@dataclass(frozen=True)
class CoresetResult:
    """A finished coreset: the ids plus enough structure to replay exchanges."""

    ids: frozenset
    kind: str
    regime: str
    source: tuple
    ell: int
    zeta: float
    declared_bound: int
    structure: dict
    warnings: tuple = ()

    @property
    def approx_log_factor(self):
        """Log-domain loss guarantee: 2*ell*log(zeta*ell)."""
        return 2.0 * self.ell * math.log(self.zeta * self.ell)

    def layer_lists(self):
        """All local-search layers in construction order, ids sorted."""
        return _layer_lists(self)


def _layer_lists(result):
    out = []
    if result.kind == "cardinality":
        inner = result.structure["selection"]
        if isinstance(inner, PeelingCoreset):
            out.extend(sorted(l.ids) for l in inner.layers)
        else:
            out.append(sorted(inner.ids))
    elif result.kind == "partition":
        for g in sorted(result.structure["parts"]):
            inner = result.structure["parts"][g]
            if isinstance(inner, PeelingCoreset):
                out.extend(sorted(l.ids) for l in inner.layers)
            else:
                out.append(sorted(inner.ids))
    elif result.kind == "laminar":
        for root in sorted(result.structure["roots"]):
            _collect_node_layers(result.structure["roots"][root], out)
    elif result.kind == "composed":
        for part in result.structure["machines"]:
            out.extend(_layer_lists(part))
    return out


def _collect_node_layers(node, out):
    for layer in node.layers:
        out.append(sorted(layer.ids))
    for child in node.children:
        _collect_node_layers(child, out)


def _degenerate_warnings(prefix, layers):
    return tuple(
        "%s layer %d is degenerate (working set rank below ell)" % (prefix, i)
        for i, layer in enumerate(layers)
        if layer.degenerate
    )


def partition_coreset(points, V, constraint, ell, zeta=DEFAULT_ZETA):
    """Coreset for a partition constraint over the working set V.

    With ell equal to the constraint rank k (only possible when k <= dim)
    each group contributes a single local optimum and the size bound is
    s*k.  With ell < k each group is peeled with its own cap as threshold
    and the size bound is k*ell.
    """
    if constraint.kind != "partition":
        raise PreconditionError("partition_coreset needs a partition constraint")
    k = constraint.rank
    vset = set(V)
    stray = vset - constraint.ground
    if stray:
        raise UnknownIdError("id %d is not in the constraint's ground set" % min(stray))
    parts = {}
    warnings = []
    if ell == k:
        regime = REGIME_LOWK
        bound = len(constraint.caps) * k
        for g in range(constraint.num_groups):
            share = vset & constraint.part_ids(g)
            if not share:
                continue
            res = local_opt(points, share, ell, zeta)
            parts[g] = res
            warnings.extend(_degenerate_warnings("group %d" % g, [res]))
    elif ell < k:
        regime = REGIME_HIGHK
        bound = k * ell
        for g in range(constraint.num_groups):
            share = vset & constraint.part_ids(g)
            cap = constraint.caps[g]
            if not share or cap == 0:
                continue
            pc = peeling_coreset(points, share, cap, ell, zeta)
            parts[g] = pc
            warnings.extend(_degenerate_warnings("group %d" % g, pc.layers))
    else:
        raise PreconditionError("ell=%d exceeds constraint rank %d" % (ell, k))
    ids = set()
    for inner in parts.values():
        ids.update(inner.union if isinstance(inner, PeelingCoreset) else inner.ids)
    assert len(ids) <= bound, "partition coreset size bound violated"
    return CoresetResult(
        ids=frozenset(ids),
        kind="partition",
        regime=regime,
        source=tuple(sorted(vset)),
        ell=ell,
        zeta=zeta,
        declared_bound=bound,
        structure={"parts": parts},
        warnings=tuple(warnings),
    )


def _cover_depth(constraint, i):
    kids = constraint.children_of(i)
    return 1 + (max(_cover_depth(constraint, j) for j in kids) if kids else 0)


def _build_laminar_node(points, vset, constraint, node_idx, ell, zeta, warnings, path):
    members = constraint.set_ids(node_idx)
    cap = constraint.cap_of(node_idx)
    working = vset & members
    layers = []
    removed = []
    child_nodes = {}
    for layer_no in range(cap):
        if not working:
            break
        res = local_opt(points, working, ell, zeta)
        if res.degenerate:
            warnings.append("%s layer %d is degenerate" % (path, layer_no))
        deleted = set()
        for pid in res.ids:
            child = constraint.child_containing(node_idx, pid)
            if child is None:
                deleted.add(pid)
            else:
                deleted |= constraint.set_ids(child)
                if child not in child_nodes:
                    child_nodes[child] = _build_laminar_node(
                        points, vset, constraint, child, ell, zeta, warnings,
                        "%s/set%d" % (path, child),
                    )
        layers.append(res)
        removed.append(frozenset(deleted))
        working = working - deleted
    node = LaminarNodeCoreset(
        set_ids=members,
        cap=cap,
        layers=tuple(layers),
        removed=tuple(removed),
        children=tuple(child_nodes[c] for c in sorted(child_nodes)),
    )
    depth = _cover_depth(constraint, node_idx)
    assert len(node.collect_ids()) <= (cap * ell) ** depth, "laminar node size bound violated"
    return node


def laminar_coreset(points, V, constraint, ell, zeta=DEFAULT_ZETA):
    """Coreset for a laminar constraint: peel each maximal set, recurse inward.

    Every element of V outside all family sets is always selectable and is
    included verbatim.  Total size is asserted against (k*ell)**r where k is
    the constraint rank and r the cover number of the family.
    """
    if constraint.kind != "laminar":
        raise PreconditionError("laminar_coreset needs a laminar constraint")
    vset = set(V)
    stray = vset - constraint.ground
    if stray:
        raise UnknownIdError("id %d is not in the constraint's ground set" % min(stray))
    warnings = []
    roots = {}
    for i in constraint.roots:
        if vset & constraint.set_ids(i):
            roots[i] = _build_laminar_node(
                points, vset, constraint, i, ell, zeta, warnings, "set%d" % i
            )
    free = sorted(vset & constraint.free_ids)
    ids = set(free)
    for node in roots.values():
        ids.update(node.collect_ids())
    k = constraint.rank
    depth = max((_cover_depth(constraint, i) for i in constraint.roots), default=1)
    bound = (k * ell) ** depth
    # the per-node asserts carry the real bound; this one catches accounting bugs
    node_sum = len(free) + sum(
        (constraint.cap_of(i) * ell) ** _cover_depth(constraint, i) for i in constraint.roots
    )
    assert len(ids) <= max(bound, node_sum), "laminar coreset size bound violated"
    return CoresetResult(
        ids=frozenset(ids),
        kind="laminar",
        regime=REGIME_LOWK if ell == k else REGIME_HIGHK,
        source=tuple(sorted(vset)),
        ell=ell,
        zeta=zeta,
        declared_bound=bound,
        structure={"roots": roots, "free": tuple(free)},
        warnings=tuple(warnings),
    )


def build_coreset(points, V, constraint, zeta=DEFAULT_ZETA, regime="auto"):
    """Construct the coreset matching the constraint kind and rank regime.

    ``regime`` is "auto" (lowk when rank <= dim, highk otherwise), or an
    explicit "lowk" / "highk"; forcing a regime the rank does not support
    raises PreconditionError.  In the lowk regime the layer size ell is the
    rank itself; in the highk regime it is the dimension.
    """
    k = constraint.rank
    d = points.dim
    if regime == "auto":
        regime = REGIME_LOWK if k <= d else REGIME_HIGHK
    if regime == REGIME_LOWK:
        if k > d:
            raise PreconditionError("lowk regime needs rank <= dim (rank %d, dim %d)" % (k, d))
        ell = k
    elif regime == REGIME_HIGHK:
        if k <= d:
            raise PreconditionError("highk regime needs rank > dim (rank %d, dim %d)" % (k, d))
        ell = d
    else:
        raise PreconditionError("regime must be 'auto', 'lowk', or 'highk', got %r" % (regime,))

    if constraint.kind == "partition":
        return partition_coreset(points, V, constraint, ell, zeta)
    if constraint.kind == "laminar":
        return laminar_coreset(points, V, constraint, ell, zeta)
    if constraint.kind != "cardinality":
        raise PreconditionError("unsupported constraint kind %r" % (constraint.kind,))
    vset = set(V)
    stray = vset - constraint.ground
    if stray:
        raise UnknownIdError("id %d is not in the constraint's ground set" % min(stray))
    if regime == REGIME_LOWK:
        inner = local_opt(points, vset, ell, zeta) if vset else None
        ids = frozenset(inner.ids) if inner else frozenset()
        bound = k
        warnings = _degenerate_warnings("selection", [inner] if inner else [])
    else:
        inner = peeling_coreset(points, vset, k, ell, zeta) if vset else None
        ids = inner.union if inner else frozenset()
        bound = k * ell
        warnings = _degenerate_warnings("selection", inner.layers if inner else [])
    assert len(ids) <= bound, "cardinality coreset size bound violated"
    return CoresetResult(
        ids=ids,
        kind="cardinality",
        regime=regime,
        source=tuple(sorted(vset)),
        ell=ell,
        zeta=zeta,
        declared_bound=bound,
        structure={"selection": inner},
        warnings=warnings,
    )


def compose(coresets):
    """Union per-machine coresets built over pairwise disjoint working sets.

    All inputs must agree on ell, zeta, kind, and regime.  The result keeps
    the machines in the structure so their exchanges can still be replayed.
    """
    parts = list(coresets)
    if not parts:
        raise PreconditionError("compose needs at least one coreset")
    first = parts[0]
    seen = set()
    for cs in parts:
        if (cs.ell, cs.zeta, cs.kind, cs.regime) != (first.ell, first.zeta, first.kind, first.regime):
            raise PreconditionError("compose: coresets disagree on (ell, zeta, kind, regime)")
        overlap = seen & set(cs.source)
        if overlap:
            raise PreconditionError(
                "compose: working sets overlap (id %d appears twice)" % min(overlap)
            )
        seen.update(cs.source)
    ids = frozenset().union(*(cs.ids for cs in parts))
    return CoresetResult(
        ids=ids,
        kind="composed",
        regime=first.regime,
        source=tuple(sorted(seen)),
        ell=first.ell,
        zeta=first.zeta,
        declared_bound=sum(cs.declared_bound for cs in parts),
        structure={"machines": tuple(parts)},
        warnings=tuple(w for cs in parts for w in cs.warnings),
    )


def _default_profile(union_ids, zeta, ell):
    return WeightProfile(frozenset(union_ids), zeta, ell, REGIME_HIGHK)


def find_value_preserving_exchange(points, S, e, peeling, profile=None):
    """Replacement for e out of the first peeled layer that S misses.

    Preconditions: e is in S and in the peeling's working set V but not in
    its union U, and |S cap V| <= threshold.  Then some layer is disjoint
    from S (the layers are disjoint and S spends one of its <= threshold
    intersections on e itself), and the smallest-index such layer contains
    an f with mu_tilde(S - e + f) >= mu_tilde(S); the returned f maximizes
    mu_tilde over that layer, smallest id on ties.
    """
    sel = frozenset(S)
    if e not in sel:
        raise PreconditionError("element %r is not in S" % (e,))
    vset = set(peeling.source)
    if e not in vset:
        raise PreconditionError("element %r is not in the peeling working set" % (e,))
    if e in peeling.union:
        raise PreconditionError("element %r is already in the coreset union" % (e,))
    if len(sel & vset) > peeling.threshold:
        raise PreconditionError(
            "S meets the working set in %d > threshold %d elements"
            % (len(sel & vset), peeling.threshold)
        )
    target = None
    for layer in peeling.layers:
        if not (sel & layer.id_set):
            target = layer
            break
    if target is None:
        raise PreconditionError("no layer is disjoint from S; exchange hypothesis violated")
    if profile is None:
        profile = _default_profile(peeling.union, peeling.zeta, peeling.ell)
    base = sorted(sel - {e})
    best_f = None
    best_val = -math.inf
    for f in sorted(target.ids):
        val = mu_tilde(points, base + [f], profile)
        if best_f is None or val > best_val:
            best_f, best_val = f, val
    return best_f


def find_laminar_exchange(points, S, e, result, profile=None):
    """Replacement for e inside a laminar coreset, preserving feasibility.

    ``result`` must come from :func:`laminar_coreset`.  Walking from the
    maximal family set containing e: if e sits inside a removed block of
    some layer, descend into the child set that swallowed it; otherwise
    every one of the cap layers ran, their removed blocks are disjoint
    subsets of the family set, and a feasible S (at most cap elements in
    the set, one of them e outside all blocks) must miss some block
    entirely.  Any f from that block's layer keeps mu_tilde from dropping,
    and S - e + f stays feasible because every family set around f inside
    this one lies inside the untouched block.
    """
    if result.kind != "laminar":
        raise PreconditionError("find_laminar_exchange needs a laminar CoresetResult")
    sel = frozenset(S)
    if e not in sel:
        raise PreconditionError("element %r is not in S" % (e,))
    if e not in set(result.source):
        raise PreconditionError("element %r is not in the coreset working set" % (e,))
    if e in result.ids:
        raise PreconditionError("element %r is already in the coreset" % (e,))
    node = None
    for root in result.structure["roots"].values():
        if e in root.set_ids:
            node = root
            break
    if node is None:
        raise PreconditionError(
            "element %r is outside every family set, so it is always kept" % (e,)
        )
    if profile is None:
        profile = _default_profile(result.ids, result.zeta, result.ell)
    while True:
        swallowed = None
        for layer, block in zip(node.layers, node.removed):
            if e in block:
                swallowed = block
                break
        if swallowed is None:
            break
        child = None
        for cand in node.children:
            if e in cand.set_ids:
                child = cand
                break
        if child is None:
            raise PreconditionError("inconsistent coreset structure around element %r" % (e,))
        node = child
    if len(node.layers) < node.cap:
        raise PreconditionError(
            "exchange hypothesis violated: working set exhausted before cap layers"
        )
    target = None
    for layer, block in zip(node.layers, node.removed):
        if not (sel & block):
            target = layer
            break
    if target is None:
        raise PreconditionError(
            "S meets every removed block of the family set; is S feasible?"
        )
    base = sorted(sel - {e})
    best_f = None
    best_val = -math.inf
    for f in sorted(target.ids):
        val = mu_tilde(points, base + [f], profile)
        if best_f is None or val > best_val:
            best_f, best_val = f, val
    return best_f


def coreset_to_json(result):
    """Serialize a CoresetResult to the interchange schema."""
    return {
        "regime": result.regime,
        "ids": sorted(result.ids),
        "layers": result.layer_lists(),
        "declared_bound": result.declared_bound,
        "zeta": result.zeta,
        "ell": result.ell,
        "source": sorted(result.source),
    }


def coreset_ids_from_json(doc):
    """Read back the id list (the part solvers need) from the schema."""
    if not isinstance(doc, dict) or "ids" not in doc:
        raise PreconditionError("coreset document needs an 'ids' list")
    return sorted(int(i) for i in doc["ids"])
