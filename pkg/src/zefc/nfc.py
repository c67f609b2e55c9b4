"""Network view of the 01 case: the N(c1,c2) family, cut bounds, code transforms."""

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Callable

from .bitspace import binary_to_base3_table, embed_base3
from .capacity import CapacityQuery, capacity
from .codec import KShotCode, SwitchPair, rate_account
from .errors import ZefcError

LOG2_3 = math.log2(3)
MAX_ENUM_EDGES = 20
MAX_TRANSFORM_K = 10
SOURCES = ("s1", "s2")
SINK = "rho"


@dataclass(frozen=True)
class Edge:
    """One unit-capacity directed edge."""

    id: str
    tail: str
    head: str


@dataclass(frozen=True)
class Network:
    """The two-source relay network with bundle multiplicities c1 and c2."""

    c1: int
    c2: int
    edges: tuple

    @property
    def nodes(self):
        return ("s1", "s2", "v1", "v2", SINK)

    @property
    def sources(self):
        return SOURCES

    @property
    def sink(self):
        return SINK

    def bundles(self):
        """Edge ids grouped by the five parallel bundles, in layout order."""
        d = [e.id for e in self.edges if e.id.startswith("d")]
        e = [e.id for e in self.edges if e.id.startswith("e")]
        return (
            ("s1->v1", tuple(d[: self.c1])),
            ("s2->v1", tuple(d[self.c1 : 2 * self.c1])),
            ("s2->v2", tuple(d[2 * self.c1 :])),
            ("v1->rho", tuple(e[: self.c1])),
            ("v2->rho", tuple(e[self.c1 :])),
        )

    def in_edges(self, node):
        return tuple(e for e in self.edges if e.head == node)

    def edge_index(self, eid):
        for i, e in enumerate(self.edges):
            if e.id == eid:
                return i
        raise ZefcError("unknown_edge", "edge id is not part of this network", id=eid)


@dataclass(frozen=True)
class CutClassification:
    """Source sets attached to an edge subset: disconnected, upstream-only, upstream."""

    cut: tuple
    i_c: frozenset
    j_c: frozenset
    k_c: frozenset

    @property
    def is_cut(self):
        return bool(self.i_c)


@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """A target function on one bit per source."""

    name: str
    value: Callable[[tuple], int]


ARITHMETIC_SUM = FunctionSpec(name="arithmetic_sum", value=lambda bits: bits[0] + bits[1])


@dataclass(frozen=True)
class GuangBound:
    """Minimum cut-size over class-count ratio, with its witness cut."""

    value: float
    witness: tuple
    witness_ncf: int
    cuts_seen: int


@dataclass(frozen=True, eq=False)
class KShotNetworkCode:
    """Per-edge local encoders plus a sink decoder, with realized use counts."""

    network: Network
    k: int
    theta: dict
    decoder: Callable[[tuple], int]
    n_e: dict
    n: int


@dataclass(frozen=True)
class NontightnessReport:
    """Capacity against the cut-set bound for one cap pair."""

    caps: tuple
    capacity: float
    bound_enum: float
    bound_formula: float
    witness_cut: tuple
    witness_ncf: int
    gap: float


def build_network(caps):
    """The five-bundle relay network for integer caps."""
    if caps.c1 is None or caps.c1.denominator != 1 or caps.c2.denominator != 1:
        raise ZefcError("bad_caps", "edge multiplicities must be integers", caps=caps.as_strings())
    c1, c2 = int(caps.c1), int(caps.c2)
    edges = []
    for i in range(c1):
        edges.append(Edge(f"d{i + 1}", "s1", "v1"))
    for i in range(c1):
        edges.append(Edge(f"d{c1 + i + 1}", "s2", "v1"))
    for i in range(c1):
        edges.append(Edge(f"d{2 * c1 + i + 1}", "s2", "v2"))
    for i in range(c1):
        edges.append(Edge(f"e{i + 1}", "v1", SINK))
    for i in range(c2):
        edges.append(Edge(f"e{c1 + i + 1}", "v2", SINK))
    net = Network(c1=c1, c2=c2, edges=tuple(edges))
    _validate_network(net)
    return net


def _validate_network(net):
    for s in net.sources:
        if net.in_edges(s):
            raise ZefcError("bad_network", "sources must have no incoming edges", node=s)
    if any(e.tail == net.sink for e in net.edges):
        raise ZefcError("bad_network", "the sink must have no outgoing edges")
    order, remaining = [], {e.id: e for e in net.edges}
    placed = set()
    while remaining:
        progress = [
            eid
            for eid, e in remaining.items()
            if all(f.id in placed for f in net.in_edges(e.tail))
        ]
        if not progress:
            raise ZefcError("bad_network", "edge relation has a cycle")
        for eid in progress:
            placed.add(eid)
            order.append(remaining.pop(eid))
    for node in net.nodes:
        if node != net.sink and net.sink not in _reachable(net, frozenset(), node):
            raise ZefcError("bad_network", "every non-sink node must reach the sink", node=node)


def _reachable(net, removed, start):
    """Nodes reachable from start after deleting the removed edge ids."""
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for e in net.edges:
            if e.id not in removed and e.tail == node and e.head not in seen:
                seen.add(e.head)
                frontier.append(e.head)
    return seen


def classify_cut(net, cut):
    """I/J/K source sets for an edge subset."""
    ids = {e.id for e in net.edges}
    for eid in cut:
        if eid not in ids:
            raise ZefcError("unknown_edge", "edge id is not part of this network", id=eid)
    canonical = tuple(sorted(set(cut), key=net.edge_index))
    removed = frozenset(canonical)
    i_c = frozenset(s for s in net.sources if net.sink not in _reachable(net, removed, s))
    tails = {e.tail for e in net.edges if e.id in removed}
    k_c = frozenset(s for s in net.sources if tails & _reachable(net, frozenset(), s))
    return CutClassification(cut=canonical, i_c=i_c, j_c=k_c - i_c, k_c=k_c)


def enumerate_cuts(net):
    """Every cut set (subsets whose removal disconnects some source), classified."""
    ids = [e.id for e in net.edges]
    if len(ids) > MAX_ENUM_EDGES:
        raise ZefcError(
            "too_many_edges",
            f"subset enumeration is limited to {MAX_ENUM_EDGES} edges",
            edges=len(ids),
        )
    out = []
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            cls = classify_cut(net, combo)
            if cls.is_cut:
                out.append(cls)
    return out


def strong_partitions(net, cls):
    """All partitions of a cut whose blocks disconnect disjoint source sets."""
    if not cls.is_cut:
        raise ZefcError("not_a_cut", "strong partitions are defined for cut sets only")
    cut = list(cls.cut)
    if len(cut) > 16:
        raise ZefcError("cut_too_large", "explicit partition listing is limited to 16 edges")
    out = [(tuple(cut),)]
    for mask in range(1, 1 << (len(cut) - 1)):
        one = tuple(cut[i] for i in range(len(cut)) if (mask >> i) & 1)
        two = tuple(cut[i] for i in range(len(cut)) if not (mask >> i) & 1)
        infos = [classify_cut(net, block) for block in (one, two)]
        if any(not info.i_c for info in infos):
            continue
        if (infos[0].i_c & infos[1].k_c) or (infos[1].i_c & infos[0].k_c):
            continue
        out.append((one, two))
    return out


def _class_product(fn, sources, blocks_i, j_list, leftover, rest, a_j, a_l):
    """Product over blocks of the number of distinguishable source assignments."""
    prod = 1
    for li, group in enumerate(blocks_i):
        others = [b for j, b in enumerate(blocks_i) if j != li]
        keys = set()
        for bits in itertools.product((0, 1), repeat=len(group)):
            sig = []
            for choice in itertools.product(
                *[list(itertools.product((0, 1), repeat=len(o))) for o in others]
            ):
                assign = dict(zip(group, bits))
                for o, ch in zip(others, choice):
                    assign.update(zip(o, ch))
                assign.update(zip(leftover, a_l))
                assign.update(zip(j_list, a_j))
                for d in itertools.product((0, 1), repeat=len(rest)):
                    assign.update(zip(rest, d))
                    sig.append(fn.value(tuple(assign[s] for s in sources)))
            keys.add(tuple(sig))
        prod *= len(keys)
    return prod


@functools.lru_cache(maxsize=None)
def _structure_count(fn, sources, blocks_i, j_list, leftover, rest):
    """Best class product over side-context values, by source-set structure alone."""
    best = 0
    for a_j in itertools.product((0, 1), repeat=len(j_list)):
        for a_l in itertools.product((0, 1), repeat=len(leftover)):
            best = max(
                best, _class_product(fn, sources, blocks_i, j_list, leftover, rest, a_j, a_l)
            )
    return best


class _BundleContext:
    """Per-network memo of cut classifications keyed by bundle counts."""

    def __init__(self, net):
        self.net = net
        self.groups = [list(ids) for _, ids in net.bundles()]
        self.sizes = tuple(len(g) for g in self.groups)
        self.where = {eid: bi for bi, g in enumerate(self.groups) for eid in g}
        self._cls = {}

    def signature(self, cut):
        sig = [0] * len(self.groups)
        for eid in cut:
            sig[self.where[eid]] += 1
        return tuple(sig)

    def representative(self, sig):
        return tuple(eid for g, t in zip(self.groups, sig) for eid in g[:t])

    def classify(self, sig):
        if sig not in self._cls:
            self._cls[sig] = classify_cut(self.net, self.representative(sig))
        return self._cls[sig]


def n_cf(net, cls, fn=ARITHMETIC_SUM, _ctx=None):
    """Best class-tuple count over strong partitions and side contexts."""
    if isinstance(cls, (tuple, list, set, frozenset)):
        cls = classify_cut(net, tuple(cls))
    if not cls.is_cut:
        raise ZefcError("not_a_cut", "the class count is defined for cut sets only")
    ctx = _ctx if _ctx is not None else _BundleContext(net)
    sources = net.sources
    i_set, j_list = cls.i_c, tuple(sorted(cls.j_c))
    rest = tuple(s for s in sources if s not in cls.k_c)
    sig = ctx.signature(cls.cut)

    def score(block_infos):
        blocks_i = tuple(tuple(sorted(info.i_c)) for info in block_infos)
        covered = {s for b in blocks_i for s in b}
        leftover = tuple(sorted(s for s in i_set if s not in covered))
        return _structure_count(fn, sources, blocks_i, j_list, leftover, rest)

    best = score([cls])
    for take in itertools.product(*[range(t + 1) for t in sig]):
        total = sum(take)
        if total == 0 or total == sum(sig):
            continue
        one = ctx.classify(take)
        two = ctx.classify(tuple(s - t for s, t in zip(sig, take)))
        if not one.i_c or not two.i_c:
            continue
        if (one.i_c & two.k_c) or (two.i_c & one.k_c):
            continue
        best = max(best, score([one, two]))
    return best


def guang_bound(net, fn=ARITHMETIC_SUM, mode=None, threads=None):
    """Minimum |C| / log2(n_cf) over all cut sets."""
    ids = [e.id for e in net.edges]
    if mode is None:
        mode = "subset" if len(ids) <= MAX_ENUM_EDGES else "signature"
    max_classes = 2 ** len(net.sources)
    ctx = _BundleContext(net)
    memo = {}

    def evaluate(sig):
        if sig not in memo:
            cls = ctx.classify(sig)
            memo[sig] = n_cf(net, cls, fn, _ctx=ctx) if cls.is_cut else None
        return memo[sig]

    best, witness, witness_ncf, seen = None, None, None, 0
    if mode == "subset":
        if len(ids) > MAX_ENUM_EDGES:
            raise ZefcError(
                "too_many_edges",
                f"subset enumeration is limited to {MAX_ENUM_EDGES} edges; use signature mode",
                edges=len(ids),
            )
        for r in range(1, len(ids) + 1):
            if best is not None and r >= best * math.log2(max_classes):
                break
            for cut in itertools.combinations(ids, r):
                classes = evaluate(ctx.signature(cut))
                if classes is None or classes <= 1:
                    continue
                seen += 1
                ratio = r / math.log2(classes)
                if best is None or ratio < best - 1e-12:
                    best, witness, witness_ncf = ratio, cut, classes
    elif mode == "signature":
        for take in itertools.product(*[range(t + 1) for t in ctx.sizes]):
            if sum(take) == 0:
                continue
            classes = evaluate(take)
            if classes is None or classes <= 1:
                continue
            seen += 1
            ratio = sum(take) / math.log2(classes)
            if best is None or ratio < best - 1e-12:
                best, witness, witness_ncf = ratio, ctx.representative(take), classes
    else:
        raise ZefcError("bad_mode", "mode must be 'subset' or 'signature'", mode=mode)
    witness = tuple(sorted(witness, key=net.edge_index))
    return GuangBound(value=best, witness=witness, witness_ncf=witness_ncf, cuts_seen=seen)


def cutset_bound_formula(caps):
    """Closed form of the cut-set bound over the network family."""
    c1, c2 = float(caps.c1), float(caps.c2)
    if c1 <= c2 / (LOG2_3 - 1):
        return c1
    return (c1 + c2) / LOG2_3


def _chunk_layout(bits, parts):
    """Balanced bit-chunk widths, wider chunks first, with cumulative offsets."""
    base, extra = divmod(bits, parts)
    widths = [base + 1 if i < extra else base for i in range(parts)]
    layout, offset = [], 0
    for w in widths:
        layout.append((offset, w))
        offset += w
    return layout


def _bits_for(count):
    return (count - 1).bit_length() if count > 1 else 0


def make_network_code(net, k, theta, decoder):
    """Assemble a network code, deriving realized per-edge use counts."""
    if k > MAX_TRANSFORM_K:
        raise ZefcError("k_too_large", f"network codes are limited to k<={MAX_TRANSFORM_K}", k=k)
    g = global_functions(net, k, theta)
    size = 1 << k
    images = {eid: set() for eid in g}
    for x in range(size):
        for y in range(size):
            for eid, fn in g.items():
                images[eid].add(fn(x, y))
    n_e = {eid: _bits_for(len(values)) for eid, values in images.items()}
    return KShotNetworkCode(
        network=net, k=k, theta=dict(theta), decoder=decoder, n_e=n_e, n=max(n_e.values())
    )


def global_functions(net, k, theta):
    """Compose local encoders into end-to-end per-edge functions of (x, y)."""
    g = {}

    def for_edge(edge):
        if edge.id in g:
            return g[edge.id]
        fn = theta[edge.id]
        if edge.tail == "s1":
            g[edge.id] = lambda x, y, fn=fn: fn(x)
        elif edge.tail == "s2":
            g[edge.id] = lambda x, y, fn=fn: fn(y)
        else:
            feeders = [for_edge(e) for e in net.in_edges(edge.tail)]
            g[edge.id] = lambda x, y, fn=fn, fs=tuple(feeders): fn(tuple(f(x, y) for f in fs))
        return g[edge.id]

    for edge in net.edges:
        for_edge(edge)
    return g


def transform_code(code, caps):
    """Express a case-01 code as a network code over the matching network."""
    if code.switches.as_string() != "01":
        raise ZefcError(
            "bad_switches",
            "only case-01 codes have a network form",
            switches=code.switches.as_string(),
        )
    if code.k > MAX_TRANSFORM_K:
        raise ZefcError("k_too_large", f"network codes are limited to k<={MAX_TRANSFORM_K}", k=code.k)
    net = build_network(caps)
    c1, c2 = net.c1, net.c2
    k = code.k
    acct = rate_account(code, caps)
    size = 1 << k
    dense1, dense2 = {}, {}
    phi1_table, phi2_table = {}, {}
    for x in range(size):
        for y in range(size):
            v = code.phi1(x, y)
            phi1_table[(x, y)] = dense1.setdefault(v, len(dense1))
    for y in range(size):
        v = code.phi2(0, y)
        phi2_table[y] = dense2.setdefault(v, len(dense2))
    if len(dense1) != code.im1 or len(dense2) != code.im2:
        raise ZefcError(
            "bad_image_count",
            "declared image sizes disagree with the realized encoder images",
            realized=(len(dense1), len(dense2)),
        )
    back1 = {d: v for v, d in dense1.items()}
    back2 = {d: v for v, d in dense2.items()}
    word_chunks = _chunk_layout(k, c1)
    label1_chunks = _chunk_layout(_bits_for(code.im1), c1)
    label2_chunks = _chunk_layout(_bits_for(code.im2), c2)
    if max(w for _, w in label1_chunks) > acct.n1 or max(w for _, w in label2_chunks) > acct.n2:
        raise ZefcError("image_over_budget", "encoder image does not fit the channel bundle")

    def chunk(value, layout, i):
        offset, width = layout[i]
        return (value >> offset) & ((1 << width) - 1)

    def assemble(symbols, layout):
        return sum(s << layout[i][0] for i, s in enumerate(symbols))

    theta = {}
    bundles = dict(net.bundles())
    for i, eid in enumerate(bundles["s1->v1"]):
        theta[eid] = lambda x, i=i: chunk(x, word_chunks, i)
    for i, eid in enumerate(bundles["s2->v1"]):
        theta[eid] = lambda y, i=i: chunk(y, word_chunks, i)
    for i, eid in enumerate(bundles["s2->v2"]):
        theta[eid] = lambda y, i=i: chunk(y, word_chunks, i)

    def v1_label(incoming):
        x = assemble(incoming[:c1], word_chunks)
        y = assemble(incoming[c1:], word_chunks)
        return phi1_table[(x, y)]

    def v2_label(incoming):
        return phi2_table[assemble(incoming, word_chunks)]

    for i, eid in enumerate(bundles["v1->rho"]):
        theta[eid] = lambda incoming, i=i: chunk(v1_label(incoming), label1_chunks, i)
    for i, eid in enumerate(bundles["v2->rho"]):
        theta[eid] = lambda incoming, i=i: chunk(v2_label(incoming), label2_chunks, i)

    def decoder(symbols):
        a = assemble(symbols[:c1], label1_chunks)
        b = assemble(symbols[c1:], label2_chunks)
        if a not in back1 or b not in back2:
            return 0
        return code.psi(back1[a], back2[b])

    ncode = make_network_code(net, k, theta, decoder)
    if ncode.n != acct.n:
        raise ZefcError(
            "transform_rate_mismatch",
            "network and distributed use counts disagree",
            network=ncode.n,
            distributed=acct.n,
        )
    return ncode


def check_network_admissible(ncode):
    """Exhaustively verify the sink decodes the componentwise sum."""
    k = ncode.k
    net = ncode.network
    g = global_functions(net, k, ncode.theta)
    sink_feed = [g[e.id] for e in net.in_edges(net.sink)]
    table = binary_to_base3_table(k) if k <= 16 else None
    to3 = (lambda v: table[v]) if table else (lambda v: embed_base3(v, k))
    size = 1 << k
    for x in range(size):
        for y in range(size):
            got = ncode.decoder(tuple(f(x, y) for f in sink_feed))
            if got != to3(x) + to3(y):
                return False
    return True


def inverse_transform(ncode):
    """Recover a two-encoder code from a network code's sink-facing functions."""
    net = ncode.network
    k = ncode.k
    g = global_functions(net, k, ncode.theta)
    bundles = dict(net.bundles())
    wide = [g[eid] for eid in bundles["v1->rho"]]
    narrow = [g[eid] for eid in bundles["v2->rho"]]
    size = 1 << k
    label1, label2 = {}, {}
    phi1_map, phi2_map = {}, {}
    for x in range(size):
        for y in range(size):
            t1 = tuple(f(x, y) for f in wide)
            if t1 not in label1:
                label1[t1] = len(label1)
            phi1_map[(x, y)] = label1[t1]
            t2 = tuple(f(x, y) for f in narrow)
            if t2 not in label2:
                label2[t2] = len(label2)
            if phi2_map.setdefault(y, label2[t2]) != label2[t2]:
                raise ZefcError(
                    "bad_network_code", "the narrow-channel message must not depend on x"
                )
    rep1 = {label: t for t, label in label1.items()}
    rep2 = {label: t for t, label in label2.items()}
    psi_map = {
        (a, b): ncode.decoder(rep1[a] + rep2[b]) for a in rep1 for b in rep2
    }
    return KShotCode(
        k=k,
        switches=SwitchPair(0, 1),
        phi1=lambda x, y: phi1_map[(x, y)],
        phi2=lambda x, y: phi2_map[y],
        psi=lambda a, b: psi_map.get((a, b), 0),
        im1=len(label1),
        im2=len(label2),
        name="inverse-transform",
    )


def network_to_json(net):
    """Plain JSON form of the node and edge structure."""
    return {
        "nodes": list(net.nodes),
        "edges": [{"id": e.id, "tail": e.tail, "head": e.head} for e in net.edges],
    }


def nontightness_report(caps, fn=ARITHMETIC_SUM):
    """Capacity vs the cut-set bound; the gap is positive exactly when c1 > c2."""
    net = build_network(caps)
    query = CapacityQuery(SwitchPair(0, 1), caps, "arithmetic_sum")
    cap_value = capacity(query).value
    bound = guang_bound(net, fn)
    formula = cutset_bound_formula(caps)
    if abs(bound.value - formula) > 1e-9:
        raise ZefcError(
            "bound_mismatch",
            "enumerated bound disagrees with the closed form",
            enumerated=bound.value,
            formula=formula,
        )
    gap = bound.value - cap_value
    assert (gap > 1e-12) == (caps.c1 > caps.c2)
    return NontightnessReport(
        caps=caps.as_strings(),
        capacity=cap_value,
        bound_enum=bound.value,
        bound_formula=formula,
        witness_cut=bound.witness,
        witness_ncf=bound.witness_ncf,
        gap=gap,
    )
