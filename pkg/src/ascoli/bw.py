"""Finite-horizon Bolzano-Weierstrass extractors and 0/1-tree search.

Every extractor looks only at the first ``horizon`` terms. At each level it
keeps the sub-cell holding the most surviving terms (ties go to the left),
and the selector takes, level by level, the least surviving index larger
than the previous pick. Cells are half-open dyadic intervals ``[a, a+w)``
except the rightmost one which is closed, matching the binary expansion
used by :mod:`ascoli.encode`.
"""
from dataclasses import dataclass, field
from fractions import Fraction

from .encode import bin_expand, pair_cantor, prefix_distance_bound
from .errors import BudgetExceeded, CertificateFailure, DeadEnd, HorizonInsufficient, TreeFormatError
from .exactnum import format_rational, pow2


@dataclass
class Subsequence:
    """A strictly increasing index selector with a certified rate.

    ``rate[k]`` is the position from which all selected terms are pairwise
    ``2**-k``-close (for Cantor points: share their length-``k`` prefix).
    """

    indices: tuple
    rate: dict
    diagnostics: dict = field(default_factory=dict)
    cells: list = field(default_factory=list)

    def __post_init__(self):
        self.indices = tuple(self.indices)
        for a, b in zip(self.indices, self.indices[1:]):
            if not a < b:
                raise ValueError("selector must be strictly increasing")

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __getitem__(self, n):
        return self.indices[n]

    def tail(self, k):
        return self.indices[self.rate[k]:]

    def limit_interval(self, k, bounds):
        """Interval certain to hold any ``2**-k``-limit of the selected terms.

        ``bounds(n)`` gives a rational interval containing term ``n``.
        Returns ``None`` when the tail is empty.
        """
        tail = self.tail(k)
        if not tail:
            return None
        eps = pow2(-k)
        boxes = [bounds(n) for n in tail]
        return max(hi for _, hi in boxes) - eps, min(lo for lo, _ in boxes) + eps

    def to_json(self):
        out = {"g": list(self.indices),
               "rate": {str(k): m for k, m in sorted(self.rate.items())}}
        if self.cells:
            out["cells"] = [[[format_rational(a), format_rational(b)] for a, b in cell]
                            for cell in self.cells]
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def _cell_index(q, level):
    cells = 1 << level
    return min((q.numerator << level) // q.denominator, cells - 1)


def _term_cell(x, level):
    """Dyadic cell of ``x`` at ``level``; approximated terms use precision level+2."""
    if x.exact is not None:
        return _cell_index(x.exact, level)
    return _cell_index(x.approx(level + 2).value, level)


def _greedy(levels, tail_pool):
    """Least survivor above the previous pick, level by level."""
    picks = []
    for survivors in levels:
        nxt = next((i for i in survivors if not picks or i > picks[-1]), None)
        if nxt is None:
            return picks, False
        picks.append(nxt)
    picks.extend(i for i in tail_pool if i > picks[-1])
    return picks, True


def _bisect_boxes(columns, horizon, levels):
    """Nested majority bisection of ``horizon`` points in [0,1]^d.

    ``columns[c](n)`` is coordinate ``c`` of term ``n`` as a Real01.
    Returns the survivor lists per level and the chosen box per level.
    """
    dims = len(columns)
    survivors = list(range(horizon))
    chosen = (0,) * dims
    history = [survivors]
    boxes = [chosen]
    for level in range(1, levels + 1):
        counts = {}
        members = {}
        for n in survivors:
            key = []
            for c in range(dims):
                child = _term_cell(columns[c](n), level) - 2 * chosen[c]
                if child not in (0, 1):
                    key = None
                    break
                key.append(child)
            if key is None:
                continue
            key = tuple(key)
            counts[key] = counts.get(key, 0) + 1
            members.setdefault(key, []).append(n)
        if not counts:
            survivors = []
        else:
            best = max(counts.values())
            key = min(k for k, v in counts.items() if v == best)
            survivors = members[key]
            chosen = tuple(2 * chosen[c] + key[c] for c in range(dims))
        history.append(survivors)
        boxes.append(chosen)
    return history, boxes


def _box_intervals(box, level):
    w = pow2(-level)
    return [(c * w, (c + 1) * w) for c in box]


def _check_close(sub, columns, k_max):
    for k in range(k_max + 1):
        tail = sub.tail(k)
        for col in columns:
            if len(tail) < 2:
                break
            boxes = [col(n).bounds(k + 4) for n in tail]
            spread = max(hi for _, hi in boxes) - min(lo for lo, _ in boxes)
            if spread > pow2(-k):
                raise CertificateFailure(f"rate claim for k={k} fails on the prefix", k=k)


def _bw_boxes(columns, horizon, k_max):
    if horizon < (1 << k_max):
        raise HorizonInsufficient(f"horizon {horizon} < 2^{k_max}")
    exact = all(col(n).exact is not None for col in columns for n in range(horizon))
    shift = 0 if exact else 1
    levels = k_max + shift
    history, boxes = _bisect_boxes(columns, horizon, levels)
    picks, complete = _greedy(history, history[-1])
    cells = [_box_intervals(b, lv) for lv, b in enumerate(boxes)]
    rate = {k: k + shift for k in range(k_max + 1)}
    diagnostics = {"horizon": horizon, "levels": levels,
                   "survivors": [len(s) for s in history], "exact": exact}
    if not complete:
        partial = Subsequence(picks, {}, diagnostics, cells)
        raise HorizonInsufficient(
            f"no surviving index beyond {picks[-1] if picks else None} at level {len(picks)}",
            partial=partial)
    sub = Subsequence(picks, rate, diagnostics, cells)
    _check_close(sub, columns, k_max)
    return sub


def _as_term(seq):
    if callable(seq):
        return seq
    return seq.__getitem__


def bw_unit(seq, horizon, k_max):
    """Bolzano-Weierstrass on [0,1] for the first ``horizon`` terms."""
    return _bw_boxes([_as_term(seq)], horizon, k_max)


def bw_pair2(seq_a, seq_b, horizon, k_max):
    """One subsequence along which both coordinate sequences converge."""
    return _bw_boxes([_as_term(seq_a), _as_term(seq_b)], horizon, k_max)


def bw_cantor(seq, horizon, depth):
    """Leftmost-majority descent of the prefix tree of ``horizon`` Cantor points.

    At each node the left child is kept when it retains at least half of the
    surviving points. The diagnostics also record where the plain
    "leftmost non-empty child" rule would have gone left instead.
    """
    if horizon <= 0:
        raise HorizonInsufficient("horizon must be positive")
    point = _as_term(seq)
    survivors = list(range(horizon))
    history = [survivors]
    path = []
    leftmost_disagreements = []
    for level in range(depth):
        zeros = [n for n in survivors if point(n).bit(level) == 0]
        if 2 * len(zeros) >= len(survivors):
            bit, survivors = 0, zeros
        else:
            bit = 1
            if zeros:
                leftmost_disagreements.append(level)
            zero_set = set(zeros)
            survivors = [n for n in survivors if n not in zero_set]
        path.append(str(bit))
        history.append(survivors)
    picks, complete = _greedy(history, survivors)
    reached = len(picks) - 1 if not complete else depth
    rate = {k: k for k in range(reached + 1)}
    diagnostics = {
        "horizon": horizon,
        "depth": depth,
        "path": "".join(path),
        "survivors_final": len(survivors),
        "threshold": "majority",
        "leftmost_rule_disagrees_at": leftmost_disagreements[:32],
        "leftmost_rule_disagreements": len(leftmost_disagreements),
    }
    if not complete:
        diagnostics["exhausted_at_level"] = len(picks)
    sub = Subsequence(picks, rate, diagnostics)
    # position p shares the path prefix of length min(p, reached), so every
    # tail(k) agrees on its length-k prefix
    chosen = "".join(path)
    for p, n in enumerate(sub.indices):
        k = min(p, reached)
        if point(n).prefix(k) != chosen[:k]:
            raise CertificateFailure(f"prefix agreement fails for k={k}", k=k)
    return sub


def product_rate_levels(k_max):
    """Cantor prefix length needed for product distance ``<= 2**-k``."""
    levels = {}
    length = 0
    for k in range(k_max + 1):
        target = pow2(-k)
        while prefix_distance_bound(length) > target:
            length += 1
        levels[k] = length
    return levels


def bw_product(seq, horizon, k_max, depth=None):
    """Bolzano-Weierstrass on [0,1]^N, routed through the Cantor encoding."""
    if horizon < (1 << k_max):
        raise HorizonInsufficient(f"horizon {horizon} < 2^{k_max}")
    point = _as_term(seq)
    levels = product_rate_levels(k_max)
    if depth is None:
        depth = levels[k_max]
    codes = {}

    def code(n):
        try:
            return codes[n]
        except KeyError:
            p = point(n)
            expansions = {}

            def element(i):
                if i not in expansions:
                    expansions[i] = bin_expand(p.coordinate(i))
                return expansions[i]

            c = codes[n] = pair_cantor(element)
            return c

    sub = bw_cantor(code, horizon, depth)
    reached = max(sub.rate)
    rate = {k: m for k, m in levels.items() if m <= reached}
    sub.diagnostics["product_levels"] = {str(k): m for k, m in levels.items()}
    return Subsequence(sub.indices, rate, sub.diagnostics)


# -- trees ------------------------------------------------------------------


class BinTree:
    """A prefix-closed set of bit strings with a membership budget.

    Queries on strings longer than ``depth_budget`` raise, unless the tree
    is ``closed`` (finite and fully listed), in which case they are simply
    non-members.
    """

    def __init__(self, member, depth_budget, closed=False):
        self._member = member
        self.depth_budget = int(depth_budget)
        self.closed = closed

    @classmethod
    def from_members(cls, strings, depth_budget=None):
        members = set(strings)
        for s in members:
            if set(s) - {"0", "1"}:
                raise TreeFormatError(f"not a bit string: {s!r}")
            for cut in range(len(s)):
                if s[:cut] not in members:
                    raise TreeFormatError(f"{s!r} present but prefix {s[:cut]!r} missing")
        height = max((len(s) for s in members), default=0)
        if depth_budget is None:
            depth_budget = height
        if height > depth_budget:
            raise TreeFormatError(f"member of length {height} beyond budget {depth_budget}")
        tree = cls(members.__contains__, depth_budget, closed=True)
        tree.members = members
        return tree

    @classmethod
    def full(cls, depth):
        return cls(lambda s: len(s) <= depth, depth, closed=True)

    def __contains__(self, s):
        if len(s) > self.depth_budget:
            if self.closed:
                return False
            raise BudgetExceeded(f"membership of length {len(s)} beyond budget {self.depth_budget}")
        return bool(self._member(s))

    def members_up_to(self, depth):
        out = []
        frontier = [""] if "" in self else []
        while frontier:
            s = frontier.pop()
            out.append(s)
            if len(s) < depth:
                frontier.extend(c for c in (s + "1", s + "0") if c in self)
        return sorted(out, key=lambda s: (len(s), s))


def random_tree(depth_budget, rng, keep=Fraction(2, 3)):
    """Random finite tree with one branch reaching ``depth_budget``.

    Children other than the spine are kept with probability ``keep``;
    ``rng`` is a :class:`random.Random`.
    """
    spine = "".join(rng.choice("01") for _ in range(depth_budget))
    members = {spine[:i] for i in range(depth_budget + 1)}
    stack = [""]
    while stack:
        s = stack.pop()
        if len(s) >= depth_budget:
            continue
        for c in (s + "0", s + "1"):
            if c in members or rng.randrange(keep.denominator) < keep.numerator:
                members.add(c)
                stack.append(c)
    return BinTree.from_members(members, depth_budget)


def load_tree(text):
    """Parse the tree file format: a ``depth_budget=D`` header, then members.

    The root is written ``ε``. Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise TreeFormatError("empty tree file")
    key, sep, value = lines[0].partition("=")
    if key.strip() != "depth_budget" or not sep:
        raise TreeFormatError("first line must be depth_budget=D")
    try:
        budget = int(value)
    except ValueError:
        raise TreeFormatError(f"bad depth budget {value!r}") from None
    if budget < 0:
        raise TreeFormatError("depth budget must be natural")
    members = ["" if ln == "ε" else ln for ln in lines[1:]]
    if len(set(members)) != len(members):
        raise TreeFormatError("duplicate members")
    return BinTree.from_members(members, budget)


def dump_tree(tree):
    lines = [f"depth_budget={tree.depth_budget}"]
    lines.extend(s if s else "ε" for s in tree.members_up_to(tree.depth_budget))
    return "\n".join(lines) + "\n"


def _check_budget(tree, length):
    if not tree.closed and length > tree.depth_budget:
        raise BudgetExceeded(f"query to depth {length} beyond budget {tree.depth_budget}")


def node_alive(tree, node, depth):
    """Does ``node`` have an extension of length ``depth`` inside the tree?"""
    _check_budget(tree, len(node) + depth)
    if node not in tree:
        return False
    stack = [node]
    target = len(node) + depth
    while stack:
        s = stack.pop()
        if len(s) == target:
            return True
        for c in (s + "1", s + "0"):
            if c in tree:
                stack.append(c)
    return False


def leftmost_path(tree, length, depth):
    """Leftmost branch of nodes that stay alive ``depth`` levels below."""
    _check_budget(tree, length + depth)
    cur = ""
    for _ in range(length):
        if node_alive(tree, cur + "0", depth):
            cur += "0"
        elif node_alive(tree, cur + "1", depth):
            cur += "1"
        else:
            raise DeadEnd(f"both children of {cur!r} die within {depth} levels", node=cur)
    return cur

