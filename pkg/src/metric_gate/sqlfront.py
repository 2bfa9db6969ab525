"""SQL frontend: lexer, SELECT parser, structural summary, normalizer.

The analyzer never executes SQL; it reads a metric definition and reduces it
to a :class:`QuerySummary`, the structural digest every later stage works
from. Two entry points:

``parse_sql(text)``
    Strict. Accepts a single SELECT statement in an ANSI-flavored dialect and
    returns a summary. Raises :class:`SqlSyntaxError` (with the byte offset of
    the offending token) on malformed input and :class:`UnsupportedStatement`
    on anything that is not a SELECT.

``normalize_query(text)``
    Total. Lowercases, splits on non-word boundaries, masks string literals to
    ``<str>`` and numeric literals to ``<num>``. Never raises; feeds the
    embedding stage. Normalization is idempotent: re-normalizing the
    space-joined token stream reproduces it.

Dialect (fixed, documented here and in the README):

* one SELECT statement, optional trailing semicolon;
* ``WITH`` common table expressions at statement level only;
* explicit joins (``[INNER|LEFT|RIGHT|FULL [OUTER]|CROSS] JOIN ... [ON|USING]``)
  and comma joins;
* ``WHERE`` / ``GROUP BY`` / ``HAVING`` / ``ORDER BY`` / ``LIMIT`` / ``OFFSET``;
* subqueries in FROM, IN, EXISTS, and scalar position;
* window functions (``fn(...) OVER (...)``), ``CASE``, ``CAST``;
* ``--`` and ``/* */`` comments, ``'...'`` strings (doubled-quote escape),
  ``"..."`` quoted identifiers;
* every SELECT requires a FROM clause (a metric with no source table is
  meaningless here), so ``tables`` is non-empty for any parsed statement;
* no set operations (UNION/INTERSECT/EXCEPT) and no recursive CTEs.

Summary folding: group-by, select, and where columns from nested scopes (CTE
bodies, derived tables, predicate subqueries) are folded into the one summary
in source order, deduplicated keeping first occurrence. Overexposure checks
read the union: a sensitive grouping is flagged no matter how deeply it is
buried. ``subquery_depth`` counts nesting below the main body (0 = flat); CTE
bodies themselves run at depth 0 and are tracked by ``cte_count`` instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SqlSyntaxError, UnsupportedStatement

__all__ = [
    "QuerySummary",
    "NormalizedTokens",
    "parse_sql",
    "normalize_query",
]


# ---------------------------------------------------------------------------
# public result types
# ---------------------------------------------------------------------------


@dataclass(eq=True)
class QuerySummary:
    """Structural digest of one SELECT statement (all names lowercase)."""

    tables: list[str]
    join_count: int
    group_by_columns: list[str]
    select_columns: list[str]
    aggregate_functions: list[str]
    where_columns: list[str]
    subquery_depth: int
    cte_count: int
    window_fn_count: int
    reduced_confidence: bool


@dataclass(eq=True)
class NormalizedTokens:
    """Masked, lowercased token stream of a query."""

    tokens: list[str]

    def detokenize(self) -> str:
        return " ".join(self.tokens)


STAR = "<star>"
STR_MASK = "<str>"
NUM_MASK = "<num>"


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_KIND_IDENT = "ident"
_KIND_NUMBER = "number"
_KIND_STRING = "string"
_KIND_OP = "op"
_KIND_EOF = "eof"

# longest first so the scanner prefers two-char operators
_TWO_CHAR_OPS = ("<=", ">=", "<>", "!=", "||")

_WORD_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_WORD_CHARS = _WORD_START | frozenset("0123456789")
_DIGITS = frozenset("0123456789")


@dataclass
class _Token:
    kind: str
    text: str  # normalized text: idents lowercased, strings/numbers raw
    offset: int  # char offset into the source (converted to bytes on error)
    quoted: bool = False  # quoted identifiers never match keywords


def _byte_offset(text: str, char_index: int) -> int:
    return len(text[:char_index].encode("utf-8"))


def _lex(text: str) -> list[_Token]:
    """Strict scan for the parser. Raises SqlSyntaxError on bad lexemes."""
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if text.startswith("--", i):
            j = text.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise SqlSyntaxError("unterminated block comment", _byte_offset(text, i))
            i = j + 2
            continue
        if c == "'":
            start = i
            i += 1
            while True:
                if i >= n:
                    raise SqlSyntaxError("unterminated string literal", _byte_offset(text, start))
                if text[i] == "'":
                    if i + 1 < n and text[i + 1] == "'":  # doubled-quote escape
                        i += 2
                        continue
                    i += 1
                    break
                i += 1
            tokens.append(_Token(_KIND_STRING, text[start:i], start))
            continue
        if c == '"':
            start = i
            j = text.find('"', i + 1)
            if j < 0:
                raise SqlSyntaxError("unterminated quoted identifier", _byte_offset(text, start))
            tokens.append(_Token(_KIND_IDENT, text[i + 1 : j].lower(), start, quoted=True))
            i = j + 1
            continue
        if c in _WORD_START:
            start = i
            while i < n and text[i] in _WORD_CHARS:
                i += 1
            tokens.append(_Token(_KIND_IDENT, text[start:i].lower(), start))
            continue
        if c in _DIGITS or (c == "." and i + 1 < n and text[i + 1] in _DIGITS):
            start = i
            i = _scan_number(text, i)
            tokens.append(_Token(_KIND_NUMBER, text[start:i], start))
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(_Token(_KIND_OP, two, i))
            i += 2
            continue
        if c in "(),.;*=<>+-/%":
            tokens.append(_Token(_KIND_OP, c, i))
            i += 1
            continue
        raise SqlSyntaxError(f"unexpected character {c!r}", _byte_offset(text, i))
    tokens.append(_Token(_KIND_EOF, "", n))
    return tokens


def _scan_number(text: str, i: int) -> int:
    n = len(text)
    while i < n and text[i] in _DIGITS:
        i += 1
    if i < n and text[i] == "." and i + 1 < n and text[i + 1] in _DIGITS:
        i += 1
        while i < n and text[i] in _DIGITS:
            i += 1
    elif i < n and text[i] == "." and (i == 0 or text[i - 1] in _DIGITS):
        i += 1
    if i < n and text[i] in "eE":
        j = i + 1
        if j < n and text[j] in "+-":
            j += 1
        if j < n and text[j] in _DIGITS:
            i = j
            while i < n and text[i] in _DIGITS:
                i += 1
    return i


# ---------------------------------------------------------------------------
# normalizer (total; independent of the strict lexer)
# ---------------------------------------------------------------------------


def normalize_query(text: str) -> NormalizedTokens:
    """Lowercase, split, and mask literals. Never raises."""
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        # mask tokens pass through unchanged so normalization is idempotent
        if text.startswith(STR_MASK, i):
            tokens.append(STR_MASK)
            i += len(STR_MASK)
            continue
        if text.startswith(NUM_MASK, i):
            tokens.append(NUM_MASK)
            i += len(NUM_MASK)
            continue
        if text.startswith("--", i):
            j = text.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            i = n if j < 0 else j + 2
            continue
        if c == "'":
            i += 1
            while i < n:
                if text[i] == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        i += 2
                        continue
                    i += 1
                    break
                i += 1
            tokens.append(STR_MASK)
            continue
        if c in _WORD_START:
            start = i
            while i < n and text[i] in _WORD_CHARS:
                i += 1
            tokens.append(text[start:i].lower())
            continue
        if c in _DIGITS or (c == "." and i + 1 < n and text[i + 1] in _DIGITS):
            i = _scan_number(text, i)
            tokens.append(NUM_MASK)
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(two)
            i += 2
            continue
        tokens.append(c)
        i += 1
    return NormalizedTokens(tokens)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_AGGREGATES = frozenset({"count", "sum", "avg", "min", "max"})

# statement verbs the gate refuses outright
_NON_SELECT_VERBS = frozenset(
    {
        "insert", "update", "delete", "create", "drop", "alter", "truncate",
        "merge", "grant", "revoke", "explain", "pragma", "vacuum", "set",
        "show", "describe", "use", "begin", "commit", "rollback", "copy",
        "call", "values", "analyze", "attach", "detach", "replace",
    }
)

# words that terminate an implicit (AS-less) alias position
_RESERVED = frozenset(
    {
        "select", "from", "where", "group", "by", "having", "order", "limit",
        "offset", "join", "inner", "left", "right", "full", "outer", "cross",
        "on", "using", "as", "and", "or", "not", "in", "is", "null", "like",
        "between", "case", "when", "then", "else", "end", "exists", "distinct",
        "all", "union", "intersect", "except", "with", "asc", "desc", "over",
        "partition", "rows", "range", "unbounded", "preceding", "following",
        "current", "row", "cast", "true", "false",
    }
)


@dataclass
class _ExprInfo:
    """Column bookkeeping for one expression subtree."""

    plain_columns: list[str] = field(default_factory=list)  # outside aggregates
    all_columns: list[str] = field(default_factory=list)  # incl. aggregate args
    is_star: bool = False
    bare_column: str | None = None  # set when the expr is exactly one column ref
    int_literal: int | None = None  # set when the expr is a bare integer

    def merge(self, other: "_ExprInfo") -> None:
        self.plain_columns.extend(other.plain_columns)
        self.all_columns.extend(other.all_columns)
        self.bare_column = None
        self.int_literal = None
        self.is_star = False


@dataclass
class _SelectItem:
    is_star: bool
    bare_column: str | None


class _Parser:
    def __init__(self, text: str, tokens: list[_Token]) -> None:
        self.text = text
        self.toks = tokens
        self.i = 0
        self.depth = 0  # current subquery nesting depth (main body = 0)
        # statement-wide fact accumulators, folded over every scope
        self.tables: list[str] = []
        self.join_count = 0
        self.group_by: list[str] = []
        self.select_cols: list[str] = []
        self.where_cols: list[str] = []
        self.aggregates: list[str] = []
        self.cte_count = 0
        self.window_count = 0
        self.max_depth = 0

    # -- token helpers ------------------------------------------------------

    def _peek(self, ahead: int = 0) -> _Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def _next(self) -> _Token:
        tok = self.toks[self.i]
        if tok.kind != _KIND_EOF:
            self.i += 1
        return tok

    def _fail(self, message: str, tok: _Token | None = None) -> SqlSyntaxError:
        tok = tok or self._peek()
        return SqlSyntaxError(message, _byte_offset(self.text, tok.offset))

    def _at_kw(self, *words: str) -> bool:
        tok = self._peek()
        return tok.kind == _KIND_IDENT and not tok.quoted and tok.text in words

    def _take_kw(self, *words: str) -> bool:
        if self._at_kw(*words):
            self.i += 1
            return True
        return False

    def _expect_kw(self, word: str) -> None:
        if not self._take_kw(word):
            raise self._fail(f"expected {word.upper()}")

    def _at_op(self, op: str) -> bool:
        tok = self._peek()
        return tok.kind == _KIND_OP and tok.text == op

    def _take_op(self, op: str) -> bool:
        if self._at_op(op):
            self.i += 1
            return True
        return False

    def _expect_op(self, op: str) -> None:
        if not self._take_op(op):
            raise self._fail(f"expected {op!r}")

    def _expect_ident(self, what: str) -> str:
        tok = self._peek()
        if tok.kind == _KIND_IDENT and (tok.quoted or tok.text not in _RESERVED):
            self.i += 1
            return tok.text
        raise self._fail(f"expected {what}")

    # -- statement ----------------------------------------------------------

    def parse_statement(self) -> QuerySummary:
        first = self._peek()
        if first.kind == _KIND_EOF:
            raise self._fail("empty query")
        if first.kind == _KIND_IDENT and not first.quoted and first.text in _NON_SELECT_VERBS:
            raise UnsupportedStatement(
                f"only SELECT statements are analyzed, got {first.text.upper()}"
            )
        if not self._at_kw("select", "with"):
            raise self._fail("expected SELECT")
        if self._take_kw("with"):
            while True:
                self._parse_cte()
                if not self._take_op(","):
                    break
        self._parse_select()
        self._take_op(";")
        if self._peek().kind != _KIND_EOF:
            raise self._fail("unexpected trailing input after statement")
        return self._finish()

    def _parse_cte(self) -> None:
        self._expect_ident("CTE name")
        self._expect_kw("as")
        self._expect_op("(")
        # CTE bodies are siblings of the main body, not nested inside it:
        # they stay at depth 0 and are accounted for by cte_count.
        if not self._at_kw("select"):
            raise self._fail("CTE body must be a SELECT")
        self._parse_select()
        self._expect_op(")")
        self.cte_count += 1

    def _finish(self) -> QuerySummary:
        reduced = self.cte_count > 0 or self.window_count > 0 or self.max_depth > 1
        return QuerySummary(
            tables=_dedup(self.tables),
            join_count=self.join_count,
            group_by_columns=_dedup(self.group_by),
            select_columns=_dedup(self.select_cols),
            aggregate_functions=_dedup(self.aggregates),
            where_columns=_dedup(self.where_cols),
            subquery_depth=self.max_depth,
            cte_count=self.cte_count,
            window_fn_count=self.window_count,
            reduced_confidence=reduced,
        )

    # -- SELECT core --------------------------------------------------------

    def _parse_select(self) -> None:
        self._expect_kw("select")
        if not self._take_kw("distinct"):
            self._take_kw("all")
        items: list[_SelectItem] = []
        while True:
            items.append(self._parse_select_item())
            if not self._take_op(","):
                break
        self._expect_kw("from")
        self._parse_table_refs()
        if self._take_kw("where"):
            info = self._parse_expr()
            self.where_cols.extend(info.all_columns)
        if self._take_kw("group"):
            self._expect_kw("by")
            while True:
                self._parse_group_item(items)
                if not self._take_op(","):
                    break
        if self._take_kw("having"):
            info = self._parse_expr()
            self.where_cols.extend(info.all_columns)
        if self._take_kw("order"):
            self._expect_kw("by")
            while True:
                self._parse_expr()  # ordering columns carry no exposure signal
                if not self._take_kw("asc"):
                    self._take_kw("desc")
                if not self._take_op(","):
                    break
        if self._take_kw("limit"):
            self._parse_expr()
            if self._take_kw("offset") or self._take_op(","):
                self._parse_expr()

    def _parse_select_item(self) -> _SelectItem:
        if self._take_op("*"):
            self.select_cols.append(STAR)
            return _SelectItem(is_star=True, bare_column=None)
        info = self._parse_expr()
        if self._take_kw("as"):
            self._expect_ident("alias")
        elif self._peek().kind == _KIND_IDENT and (
            self._peek().quoted or self._peek().text not in _RESERVED
        ):
            self.i += 1
        if info.is_star:
            self.select_cols.append(STAR)
            return _SelectItem(is_star=True, bare_column=None)
        self.select_cols.extend(info.plain_columns)
        return _SelectItem(is_star=False, bare_column=info.bare_column)

    def _parse_group_item(self, items: list[_SelectItem]) -> None:
        info = self._parse_expr()
        if info.int_literal is not None:
            # ordinal: resolve against the select list of this scope
            k = info.int_literal
            if 1 <= k <= len(items) and items[k - 1].bare_column is not None:
                self.group_by.append(items[k - 1].bare_column)
            else:
                self.group_by.append(f"expr_{k}")
        elif info.bare_column is not None:
            self.group_by.append(info.bare_column)
        else:
            # expression entry: contribute the columns it references
            self.group_by.extend(info.all_columns)

    # -- FROM ---------------------------------------------------------------

    def _parse_table_refs(self) -> None:
        comma_refs = 1
        self._parse_table_ref()
        while True:
            if self._take_op(","):
                self._parse_table_ref()
                comma_refs += 1
                continue
            if self._at_kw("join", "inner", "left", "right", "full", "cross"):
                self._parse_join()
                continue
            break
        self.join_count += comma_refs - 1

    def _parse_join(self) -> None:
        if self._take_kw("inner") or self._take_kw("cross"):
            pass
        elif self._take_kw("left") or self._take_kw("right") or self._take_kw("full"):
            self._take_kw("outer")
        self._expect_kw("join")
        self.join_count += 1
        self._parse_table_ref()
        if self._take_kw("on"):
            self._parse_expr()  # join keys are not WHERE columns
        elif self._take_kw("using"):
            self._expect_op("(")
            while True:
                self._expect_ident("column name")
                if not self._take_op(","):
                    break
            self._expect_op(")")

    def _parse_table_ref(self) -> None:
        if self._take_op("("):
            if not self._at_kw("select"):
                raise self._fail("expected SELECT in derived table")
            self._enter_subquery()
            self._parse_select()
            self._leave_subquery()
            self._expect_op(")")
            self._maybe_alias()
            return
        name = self._expect_ident("table name")
        while self._take_op("."):
            name = self._expect_ident("table name")
        self.tables.append(name)
        self._maybe_alias()

    def _maybe_alias(self) -> None:
        if self._take_kw("as"):
            self._expect_ident("alias")
            return
        tok = self._peek()
        if tok.kind == _KIND_IDENT and (tok.quoted or tok.text not in _RESERVED):
            self.i += 1

    def _enter_subquery(self) -> None:
        self.depth += 1
        if self.depth > self.max_depth:
            self.max_depth = self.depth

    def _leave_subquery(self) -> None:
        self.depth -= 1

    # -- expressions --------------------------------------------------------

    def _parse_expr(self) -> _ExprInfo:
        return self._parse_or()

    def _parse_or(self) -> _ExprInfo:
        info = self._parse_and()
        while self._take_kw("or"):
            info.merge(self._parse_and())
        return info

    def _parse_and(self) -> _ExprInfo:
        info = self._parse_not()
        while self._take_kw("and"):
            info.merge(self._parse_not())
        return info

    def _parse_not(self) -> _ExprInfo:
        if self._take_kw("not"):
            inner = self._parse_not()
            out = _ExprInfo()
            out.merge(inner)
            return out
        return self._parse_predicate()

    def _parse_predicate(self) -> _ExprInfo:
        info = self._parse_additive()
        while True:
            tok = self._peek()
            if tok.kind == _KIND_OP and tok.text in ("=", "<>", "!=", "<", ">", "<=", ">="):
                self.i += 1
                info.merge(self._parse_additive())
                continue
            if self._take_kw("is"):
                self._take_kw("not")
                if not (
                    self._take_kw("null") or self._take_kw("true") or self._take_kw("false")
                ):
                    raise self._fail("expected NULL, TRUE, or FALSE after IS")
                info.bare_column = None
                info.int_literal = None
                continue
            if self._at_kw("not") and self._peek(1).kind == _KIND_IDENT and self._peek(1).text in (
                "in",
                "like",
                "between",
            ):
                self._take_kw("not")
                # fall through to the IN/LIKE/BETWEEN branches below
            if self._take_kw("in"):
                self._expect_op("(")
                if self._at_kw("select"):
                    self._enter_subquery()
                    self._parse_select()
                    self._leave_subquery()
                else:
                    while True:
                        info.merge(self._parse_expr())
                        if not self._take_op(","):
                            break
                self._expect_op(")")
                info.bare_column = None
                info.int_literal = None
                continue
            if self._take_kw("like"):
                info.merge(self._parse_additive())
                continue
            if self._take_kw("between"):
                info.merge(self._parse_additive())
                self._expect_kw("and")
                info.merge(self._parse_additive())
                continue
            return info

    def _parse_additive(self) -> _ExprInfo:
        info = self._parse_multiplicative()
        while True:
            tok = self._peek()
            if tok.kind == _KIND_OP and tok.text in ("+", "-", "||"):
                self.i += 1
                info.merge(self._parse_multiplicative())
                continue
            return info

    def _parse_multiplicative(self) -> _ExprInfo:
        info = self._parse_unary()
        while True:
            tok = self._peek()
            if tok.kind == _KIND_OP and tok.text in ("*", "/", "%"):
                self.i += 1
                info.merge(self._parse_unary())
                continue
            return info

    def _parse_unary(self) -> _ExprInfo:
        tok = self._peek()
        if tok.kind == _KIND_OP and tok.text in ("+", "-"):
            self.i += 1
            inner = self._parse_unary()
            out = _ExprInfo()
            out.merge(inner)
            return out
        return self._parse_primary()

    def _parse_primary(self) -> _ExprInfo:
        tok = self._peek()
        if tok.kind == _KIND_NUMBER:
            self.i += 1
            info = _ExprInfo()
            if tok.text.isdigit():
                info.int_literal = int(tok.text)
            return info
        if tok.kind == _KIND_STRING:
            self.i += 1
            return _ExprInfo()
        if tok.kind == _KIND_OP and tok.text == "(":
            self.i += 1
            if self._at_kw("select"):
                self._enter_subquery()
                self._parse_select()
                self._leave_subquery()
                self._expect_op(")")
                return _ExprInfo()
            info = self._parse_expr()
            self._expect_op(")")
            wrapped = _ExprInfo()
            wrapped.merge(info)
            return wrapped
        if tok.kind != _KIND_IDENT:
            raise self._fail("expected expression")
        if not tok.quoted and tok.text == "case":
            return self._parse_case()
        if not tok.quoted and tok.text == "cast":
            return self._parse_cast()
        if not tok.quoted and tok.text == "exists":
            self.i += 1
            self._expect_op("(")
            if not self._at_kw("select"):
                raise self._fail("expected SELECT after EXISTS")
            self._enter_subquery()
            self._parse_select()
            self._leave_subquery()
            self._expect_op(")")
            return _ExprInfo()
        if not tok.quoted and tok.text in ("null", "true", "false"):
            self.i += 1
            return _ExprInfo()
        if not tok.quoted and tok.text in _RESERVED:
            raise self._fail("expected expression")
        # identifier: function call or (qualified) column reference
        if self._peek(1).kind == _KIND_OP and self._peek(1).text == "(":
            return self._parse_function_call()
        return self._parse_column_ref()

    def _parse_column_ref(self) -> _ExprInfo:
        name = self._expect_ident("column name")
        info = _ExprInfo()
        while self._take_op("."):
            if self._take_op("*"):
                info.is_star = True
                return info
            name = self._expect_ident("column name")
        info.plain_columns.append(name)
        info.all_columns.append(name)
        info.bare_column = name
        return info

    def _parse_function_call(self) -> _ExprInfo:
        fn = self._next().text
        self._expect_op("(")
        args = _ExprInfo()
        if not self._at_op(")"):
            self._take_kw("distinct")
            if self._take_op("*"):
                pass  # COUNT(*)
            else:
                while True:
                    args.merge(self._parse_expr())
                    if not self._take_op(","):
                        break
        self._expect_op(")")
        is_aggregate = fn in _AGGREGATES
        if is_aggregate:
            self.aggregates.append(fn.upper())
        windowed = self._take_kw("over")
        if windowed:
            self.window_count += 1
            self._parse_window_spec()
        info = _ExprInfo()
        info.all_columns.extend(args.all_columns)
        if not is_aggregate and not windowed:
            # plain scalar function: its columns stay "projected" columns
            info.plain_columns.extend(args.plain_columns)
        return info

    def _parse_window_spec(self) -> None:
        self._expect_op("(")
        if self._take_kw("partition"):
            self._expect_kw("by")
            while True:
                self._parse_expr()
                if not self._take_op(","):
                    break
        if self._take_kw("order"):
            self._expect_kw("by")
            while True:
                self._parse_expr()
                if not self._take_kw("asc"):
                    self._take_kw("desc")
                if not self._take_op(","):
                    break
        if self._take_kw("rows") or self._take_kw("range"):
            if self._take_kw("between"):
                self._parse_frame_bound()
                self._expect_kw("and")
                self._parse_frame_bound()
            else:
                self._parse_frame_bound()
        self._expect_op(")")

    def _parse_frame_bound(self) -> None:
        if self._take_kw("unbounded"):
            if not (self._take_kw("preceding") or self._take_kw("following")):
                raise self._fail("expected PRECEDING or FOLLOWING")
            return
        if self._take_kw("current"):
            self._expect_kw("row")
            return
        if self._peek().kind == _KIND_NUMBER:
            self.i += 1
            if not (self._take_kw("preceding") or self._take_kw("following")):
                raise self._fail("expected PRECEDING or FOLLOWING")
            return
        raise self._fail("expected frame bound")

    def _parse_case(self) -> _ExprInfo:
        self.i += 1  # CASE
        info = _ExprInfo()
        if not self._at_kw("when"):
            info.merge(self._parse_expr())
        saw_when = False
        while self._take_kw("when"):
            saw_when = True
            info.merge(self._parse_expr())
            self._expect_kw("then")
            info.merge(self._parse_expr())
        if not saw_when:
            raise self._fail("expected WHEN in CASE expression")
        if self._take_kw("else"):
            info.merge(self._parse_expr())
        self._expect_kw("end")
        return info

    def _parse_cast(self) -> _ExprInfo:
        self.i += 1  # CAST
        self._expect_op("(")
        inner = self._parse_expr()
        self._expect_kw("as")
        tok = self._peek()
        if tok.kind != _KIND_IDENT:
            raise self._fail("expected type name")
        self.i += 1
        if self._take_op("("):
            while self._peek().kind == _KIND_NUMBER or self._at_op(","):
                self.i += 1
            self._expect_op(")")
        self._expect_op(")")
        out = _ExprInfo()
        out.merge(inner)
        return out


def _dedup(items: list[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def parse_sql(query_text: str) -> QuerySummary:
    """Parse one SELECT statement into its structural summary.

    Raises SqlSyntaxError (with byte offset) on malformed input and
    UnsupportedStatement on non-SELECT statements.
    """
    if not query_text or query_text.isspace():
        raise SqlSyntaxError("empty query", 0)
    tokens = _lex(query_text)
    return _Parser(query_text, tokens).parse_statement()
