"""Parser and pretty printer for ``.lmu`` model files.

A model file declares domains, process templates (with propositions and
formulas), networks and tile sets::

    domain Tok { none, tok }
    template Phil {
      internal state { T, H, E }
      port xin : Tok readwrite
      init state == T
      trans enterH: state == T -> state := H
      prop inE := state == E
      formula mutex := AG (inE -> xin == tok)
    }

Statements end at a newline or ``;``. Comments start with ``//``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import expr as ex
from . import mucalc as mc
from .model import (Domain, GuardedCommand, ModelError, NodeAssignment, ProcessNetwork,
                    ProcessTemplate, Update, VariableDecl)
from .tiles import Tile, TileSet

KEYWORDS = {"domain", "template", "internal", "port", "read", "write", "readwrite", "init",
            "trans", "network", "node", "edge", "connect", "initially", "tiles", "tile", "dir",
            "prop", "formula"}
# names that would be ambiguous inside formulas
RESERVED_PROPS = {"true", "false", "mu", "nu", "not", "and", "or", "E", "A", "U", "W",
                  "AG", "AF", "EF", "EG", "self", "tau", "any"}
HEADER = "// localmu model"


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col_start: int
    col_end: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col_start}"


@dataclass
class Diagnostic:
    kind: str  # lexical | syntax | unresolved | mode | model | formula
    message: str
    span: Optional[SourceSpan] = None

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.kind} error: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class FormulaDef:
    name: str
    template: str
    formula: object
    span: object = field(default=None, compare=False, repr=False)

    @property
    def text(self):
        return mc.to_text(self.formula)


@dataclass
class ModelDocument:
    domains: dict = field(default_factory=dict)
    templates: dict = field(default_factory=dict)
    networks: dict = field(default_factory=dict)
    tilesets: dict = field(default_factory=dict)
    formulas: dict = field(default_factory=dict)

    def network(self, name=None) -> ProcessNetwork:
        if name is None:
            if not self.networks:
                raise KeyError("model declares no network")
            return next(iter(self.networks.values()))
        return self.networks[name]

    def formulas_for(self, template_name):
        return {k: f for k, f in self.formulas.items() if f.template == template_name}


# -- lexer ------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>//[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|==|!=|&&|\|\||->|[{}()\[\],:;.=!])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str  # ident | num | op | nl | eof
    value: str
    span: SourceSpan


def tokenize(text, file="<input>"):
    out = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            span = SourceSpan(file, line, col, col + 1)
            raise ParseError([Diagnostic("lexical", f"unexpected character {text[pos]!r}", span)])
        kind = m.lastgroup
        val = m.group()
        span = SourceSpan(file, line, col, col + len(val))
        if kind == "nl":
            out.append(Token("nl", val, span))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, val, span))
        pos = m.end()
    out.append(Token("eof", "", SourceSpan(file, line, pos - line_start + 1, pos - line_start + 1)))
    return out


# -- parser ---------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens, file):
        self.toks = tokens
        self.i = 0
        self.file = file
        self.skip_nl = 0  # >0 inside brackets where newlines are insignificant

    # token helpers
    def peek(self, k=0):
        j = self.i
        seen = 0
        while True:
            t = self.toks[j]
            if t.kind == "nl" and self.skip_nl:
                j += 1
                continue
            if seen == k:
                return t
            seen += 1
            j += 1

    def next(self):
        while self.toks[self.i].kind == "nl" and self.skip_nl:
            self.i += 1
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, value, k=0):
        t = self.peek(k)
        return t.kind in ("op", "ident") and t.value == value

    def expect(self, value):
        t = self.next()
        if t.value != value or t.kind not in ("op", "ident"):
            self.fail(f"expected {value!r}, found {t.value or 'end of input'!r}", t)
        return t

    def ident(self, what="identifier"):
        t = self.next()
        if t.kind != "ident":
            self.fail(f"expected {what}, found {t.value or 'end of input'!r}", t)
        return t

    def fail(self, msg, tok=None, kind="syntax"):
        tok = tok or self.peek()
        raise ParseError([Diagnostic(kind, msg, tok.span)])

    def skip_separators(self):
        while self.toks[self.i].kind == "nl" or (self.toks[self.i].kind == "op" and self.toks[self.i].value == ";"):
            self.i += 1

    def end_statement(self):
        t = self.toks[self.i]
        if t.kind == "nl" or (t.kind == "op" and t.value == ";"):
            self.i += 1
        elif not (t.kind == "eof" or (t.kind == "op" and t.value == "}")):
            self.fail(f"unexpected {t.value!r} at end of statement", t)

    # bracketed region where newlines do not matter
    def braced_list(self, item):
        self.skip_nl += 1
        try:
            self.expect("{")
            items = []
            if not self.at("}"):
                items.append(item())
                while self.at(","):
                    self.next()
                    items.append(item())
            self.expect("}")
            return items
        finally:
            self.skip_nl -= 1

    # expressions ---------------------------------------------------------

    def expr(self):
        return self.expr_or()

    def expr_or(self):
        args = [self.expr_and()]
        while self.at("||") or self.at("or"):
            self.next()
            args.append(self.expr_and())
        return ex.mk_or(args) if len(args) > 1 else args[0]

    def expr_and(self):
        args = [self.expr_unary()]
        while self.at("&&") or self.at("and"):
            self.next()
            args.append(self.expr_unary())
        return ex.mk_and(args) if len(args) > 1 else args[0]

    def expr_unary(self):
        if self.at("!") or self.at("not"):
            self.next()
            return ex.Not(self.expr_unary())
        if self.at("("):
            self.skip_nl += 1
            self.next()
            e = self.expr()
            self.expect(")")
            self.skip_nl -= 1
            return e
        if self.at("true"):
            self.next()
            return ex.TRUE
        if self.at("false"):
            self.next()
            return ex.FALSE
        if self.at("exactly_one") and self.at("(", 1):
            self.next()
            return ex.Exactly(1, tuple(self.expr_args()))
        if self.at("exactly") and self.at("(", 1):
            self.next()
            self.skip_nl += 1
            try:
                self.expect("(")
                t = self.next()
                if t.kind != "num":
                    self.fail("exactly(k, ...) needs a count", t)
                args = []
                while self.at(","):
                    self.next()
                    args.append(self.expr())
                self.expect(")")
            finally:
                self.skip_nl -= 1
            return ex.Exactly(int(t.value), tuple(args))
        left = self.ident("name")
        op = self.next()
        if op.value not in ("==", "!="):
            self.fail(f"expected '==' or '!=', found {op.value!r}", op)
        right = self.ident("name")
        return ex.Cmp(op.value, ex.Name(left.value), ex.Name(right.value))

    def expr_args(self):
        self.skip_nl += 1
        try:
            self.expect("(")
            args = [self.expr()]
            while self.at(","):
                self.next()
                args.append(self.expr())
            self.expect(")")
            return args
        finally:
            self.skip_nl -= 1

    # formulas ------------------------------------------------------------

    def formula(self):
        if self.at("mu") or self.at("nu"):
            kw = self.next().value
            var = self.ident("fixpoint variable").value
            self.expect(".")
            body = self.formula()
            return (mc.Mu if kw == "mu" else mc.Nu)(var, body)
        return self.f_implies()

    def f_implies(self):
        left = self.f_or()
        if self.at("->"):
            self.next()
            return mc.Implies(left, self.formula_tail())
        return left

    def formula_tail(self):
        if self.at("mu") or self.at("nu"):
            return self.formula()
        return self.f_implies()

    def f_or(self):
        left = self.f_and()
        while self.at("||") or self.at("or"):
            self.next()
            left = mc.Or(left, self.f_and_or_binder())
        return left

    def f_and(self):
        left = self.f_unary()
        while self.at("&&") or self.at("and"):
            self.next()
            left = mc.And(left, self.f_unary_or_binder())
        return left

    def f_and_or_binder(self):
        if self.at("mu") or self.at("nu"):
            return self.formula()
        return self.f_and()

    def f_unary_or_binder(self):
        if self.at("mu") or self.at("nu"):
            return self.formula()
        return self.f_unary()

    def f_unary(self):
        t = self.peek()
        if self.at("!") or self.at("not"):
            self.next()
            return mc.Not(self.f_unary_or_binder())
        if t.kind == "ident" and t.value in mc.MODAL_OPS:
            self.next()
            labels = None
            if self.at("["):
                labels = tuple(self.label_list())
            return mc.Modal(t.value, labels, self.f_unary_or_binder())
        if t.kind == "ident" and t.value in ("E", "A") and self.at("[", 1):
            self.next()
            self.skip_nl += 1
            self.expect("[")
            phi = self.formula()
            self.expect("U" if t.value == "E" else "W")
            label = self.label_list(single=True)[0]
            psi = self.formula()
            self.expect("]")
            self.skip_nl -= 1
            return (mc.EU if t.value == "E" else mc.AW)(phi, label, psi)
        if self.at("("):
            self.skip_nl += 1
            self.next()
            f = self.formula()
            self.expect(")")
            self.skip_nl -= 1
            return f
        if self.at("true"):
            self.next()
            return mc.TRUE
        if self.at("false"):
            self.next()
            return mc.FALSE
        name = self.ident("proposition")
        if self.at("==") or self.at("!="):
            op = self.next().value
            right = self.ident("name")
            return _RawAtom(ex.Cmp(op, ex.Name(name.value), ex.Name(right.value)), name.span)
        return _RawName(name.value, name.span)

    def label_list(self, single=False):
        self.skip_nl += 1
        try:
            self.expect("[")
            labels = [self.ident("label").value]
            while self.at(",") and not single:
                self.next()
                labels.append(self.ident("label").value)
            self.expect("]")
            return labels
        finally:
            self.skip_nl -= 1

    # declarations ----------------------------------------------------------

    def document(self, doc):
        self.skip_separators()
        while self.peek().kind != "eof":
            t = self.peek()
            if self.at("domain"):
                self.domain(doc)
            elif self.at("template"):
                self.template(doc)
            elif self.at("network"):
                self.network(doc)
            elif self.at("tiles"):
                self.tiles(doc)
            else:
                self.fail(f"expected a declaration, found {t.value!r}", t)
            self.skip_separators()
        return doc

    def domain(self, doc):
        self.expect("domain")
        name = self.ident("domain name")
        values = [v.value for v in self.braced_list(lambda: self.ident("value"))]
        if name.value in doc.domains:
            self.fail(f"duplicate domain {name.value!r}", name, "model")
        try:
            doc.domains[name.value] = Domain(name.value, tuple(values))
        except ModelError as e:
            self.fail(str(e), name, "model")

    def domain_ref(self, doc):
        t = self.ident("domain name")
        if t.value not in doc.domains:
            self.fail(f"unknown domain {t.value!r}", t, "unresolved")
        return doc.domains[t.value]

    def template(self, doc):
        start = self.expect("template")
        name = self.ident("template name")
        if name.value in doc.templates:
            self.fail(f"duplicate template {name.value!r}", name, "model")
        self.expect("{")
        variables, commands, props, formulas = [], [], [], []
        init = None
        self.skip_separators()
        while not self.at("}"):
            t = self.peek()
            if self.at("internal"):
                self.next()
                v = self.ident("variable name")
                if self.at("{"):
                    values = [x.value for x in self.braced_list(lambda: self.ident("value"))]
                    dom = Domain(f"{name.value}.{v.value}", tuple(values))
                else:
                    self.expect(":")
                    dom = self.domain_ref(doc)
                variables.append(VariableDecl(v.value, dom, "internal"))
            elif self.at("port"):
                self.next()
                v = self.ident("port name")
                self.expect(":")
                dom = self.domain_ref(doc)
                mode = self.ident("port mode")
                if mode.value not in ("read", "write", "readwrite"):
                    self.fail(f"port mode must be read, write or readwrite, not {mode.value!r}", mode)
                variables.append(VariableDecl(v.value, dom, "port", mode.value))
            elif self.at("init"):
                self.next()
                init = (self.expr(), t.span)
            elif self.at("trans"):
                self.next()
                cname = self.ident("command name")
                self.expect(":")
                guard = self.expr()
                self.expect("->")
                updates = []
                if self.at("skip"):
                    self.next()
                else:
                    while True:
                        target = self.ident("assignment target")
                        self.expect(":=")
                        src = self.ident("value or variable")
                        updates.append((target.value, src.value))
                        if not self.at(","):
                            break
                        self.next()
                commands.append((cname.value, guard, updates, cname.span))
            elif self.at("prop"):
                self.next()
                pname = self.ident("proposition name")
                self.expect(":=")
                props.append((pname.value, self.expr(), pname.span))
            elif self.at("formula"):
                self.next()
                fname = self.ident("formula name")
                self.expect(":=")
                formulas.append((fname.value, self.formula(), fname.span))
            else:
                self.fail(f"unexpected {t.value!r} in template body", t)
            self.end_statement()
            self.skip_separators()
        self.expect("}")
        tmpl = self._build_template(name.value, variables, init, commands, props, start.span)
        doc.templates[tmpl.name] = tmpl
        for fname, raw, span in formulas:
            if fname in doc.formulas:
                self.fail(f"duplicate formula {fname!r}", kind="model")
            try:
                f = resolve_formula(raw, tmpl)
            except (mc.FormulaError, ex.ExprError) as e:
                raise ParseError([Diagnostic("formula", str(e), getattr(e, "span", None) or span)])
            doc.formulas[fname] = FormulaDef(fname, tmpl.name, f, span)

    def _build_template(self, name, variables, init, commands, props, span):
        domains = {v.name: v.domain.values for v in variables}
        diags = []

        def res(e, where):
            try:
                return ex.resolve(e, domains, where)
            except ex.ExprError as err:
                kind = "unresolved" if "unknown" in str(err) else "model"
                diags.append(Diagnostic(kind, str(err), err.span or where))
                return ex.TRUE

        init_e = res(init[0], init[1]) if init else ex.TRUE
        cmds = []
        for cname, guard, updates, cspan in commands:
            g = res(guard, cspan)
            ups = []
            for target, src in updates:
                if src in domains:
                    ups.append(Update(target, ex.VarRef(src)))
                else:
                    ups.append(Update(target, ex.ConstRef(src)))
            cmds.append(GuardedCommand(cname, g, tuple(ups), cspan))
        seen = set()
        prop_list = []
        for pname, e, pspan in props:
            if pname in seen:
                diags.append(Diagnostic("model", f"duplicate proposition {pname!r}", pspan))
            if pname in RESERVED_PROPS or pname in domains:
                diags.append(Diagnostic("model", f"proposition name {pname!r} is reserved or a variable", pspan))
            seen.add(pname)
            prop_list.append((pname, res(e, pspan)))
        if diags:
            raise ParseError(diags)
        try:
            return ProcessTemplate(name, tuple(variables), init_e, tuple(cmds), tuple(prop_list), span)
        except ModelError as err:
            kind = "mode" if "mode violation" in str(err) else "model"
            if "unknown" in str(err):
                kind = "unresolved"
            raise ParseError([Diagnostic(kind, str(err), err.span or span)])

    def network(self, doc):
        start = self.expect("network")
        name = self.ident("network name")
        if name.value in doc.networks:
            self.fail(f"duplicate network {name.value!r}", name, "model")
        self.expect("{")
        nodes, node_tmpl, edges, binds = [], {}, [], {}
        initially = None
        self.skip_separators()
        while not self.at("}"):
            t = self.peek()
            if self.at("node") or self.at("edge"):
                kw = self.next().value
                names = [self.ident(f"{kw} name")]
                while not self.at(":"):
                    names.append(self.ident(f"{kw} name"))
                self.expect(":")
                ref = self.ident("template" if kw == "node" else "domain")
                for nm in names:
                    if kw == "node":
                        if ref.value not in doc.templates:
                            self.fail(f"unknown template {ref.value!r}", ref, "unresolved")
                        nodes.append(nm.value)
                        node_tmpl[nm.value] = doc.templates[ref.value]
                    else:
                        if ref.value not in doc.domains:
                            self.fail(f"unknown domain {ref.value!r}", ref, "unresolved")
                        edges.append((nm.value, doc.domains[ref.value]))
            elif self.at("connect"):
                self.next()
                node = self.ident("node name")
                if node.value not in node_tmpl:
                    self.fail(f"unknown node {node.value!r}", node, "unresolved")

                def binding():
                    p = self.ident("port name")
                    self.expect("=")
                    e = self.ident("edge name")
                    return (p, e)
                pairs = self.braced_list(binding)
                tmpl = node_tmpl[node.value]
                edge_names = {e for e, _ in edges}
                for p, e in pairs:
                    if p.value not in tmpl.port_names:
                        self.fail(f"template {tmpl.name} has no port {p.value!r}", p, "unresolved")
                    if e.value not in edge_names:
                        self.fail(f"unknown edge {e.value!r}", e, "unresolved")
                    binds.setdefault(node.value, {})[p.value] = e.value
            elif self.at("initially"):
                self.next()
                initially = (self.expr(), t.span)
            else:
                self.fail(f"unexpected {t.value!r} in network body", t)
            self.end_statement()
            self.skip_separators()
        self.expect("}")
        assignment = []
        for n in nodes:
            tmpl = node_tmpl[n]
            b = binds.get(n, {})
            ports = tuple((p, b[p]) for p in tmpl.port_names if p in b)
            assignment.append((n, NodeAssignment(tmpl, ports)))
        init_e = None
        if initially is not None:
            try:
                init_e = ex.resolve(initially[0], {e: d.values for e, d in edges}, initially[1])
            except ex.ExprError as err:
                raise ParseError([Diagnostic("unresolved", str(err), initially[1])])
        try:
            net = ProcessNetwork(name.value, tuple(nodes), tuple(edges), tuple(assignment), init_e, start.span)
        except ModelError as err:
            raise ParseError([Diagnostic("model", str(err), err.span or start.span)])
        doc.networks[net.name] = net

    def tiles(self, doc):
        start = self.expect("tiles")
        name = self.ident("tile set name")
        self.expect("{")
        tiles = []
        self.skip_separators()
        while not self.at("}"):
            self.expect("tile")
            tname = self.ident("tile type")
            if tname.value not in doc.templates:
                self.fail(f"unknown template {tname.value!r}", tname, "unresolved")
            self.expect("{")
            dirs = []
            self.skip_separators()
            while not self.at("}"):
                self.expect("dir")
                d = self.ident("direction")
                self.expect("->")
                other = self.ident("neighbour type")
                self.expect(".")
                d2 = self.ident("neighbour direction")
                dirs.append((d.value, other.value, d2.value))
                self.end_statement()
                self.skip_separators()
            self.expect("}")
            tiles.append(Tile(tname.value, tuple(dirs)))
            self.end_statement()
            self.skip_separators()
        self.expect("}")
        ts = TileSet(name.value, tuple(tiles), start.span)
        from .tiles import check_tileset
        try:
            check_tileset(ts, doc.templates)
        except ModelError as err:
            raise ParseError([Diagnostic("model", str(err), start.span)])
        doc.tilesets[ts.name] = ts


@dataclass(frozen=True)
class _RawName:
    name: str
    span: object = None


@dataclass(frozen=True)
class _RawAtom:
    cmp: object
    span: object = None


def resolve_formula(raw, template: ProcessTemplate):
    """Resolve parser output against a template's propositions and ports."""
    labels = {"self", mc.ANY} | set(template.port_names)

    def label(a):
        if a not in labels:
            raise mc.FormulaError(f"unknown label {a!r} (expected self, any or a port of {template.name})")
        return a

    def walk(g, bound):
        if isinstance(g, _RawName):
            if g.name in bound:
                return mc.Var(g.name)
            if g.name in template.prop_map:
                return mc.Prop(g.name)
            raise mc.FormulaError(f"unbound name {g.name!r}: not a proposition of {template.name} "
                                  f"nor a fixpoint variable")
        if isinstance(g, _RawAtom):
            e = ex.resolve(g.cmp, template.domains, g.span)
            return mc.Prop(ex.to_text(e), e)
        if isinstance(g, (mc.Const, mc.Prop, mc.Var)):
            return g
        if isinstance(g, mc.Not):
            return mc.Not(walk(g.arg, bound))
        if isinstance(g, (mc.And, mc.Or, mc.Implies)):
            return type(g)(walk(g.left, bound), walk(g.right, bound))
        if isinstance(g, (mc.EU, mc.AW)):
            return type(g)(walk(g.phi, bound), label(g.label), walk(g.psi, bound))
        if isinstance(g, mc.Modal):
            ls = None if g.labels is None else tuple(label(a) for a in g.labels)
            return mc.Modal(g.op, ls, walk(g.arg, bound))
        if isinstance(g, (mc.Mu, mc.Nu)):
            return type(g)(g.var, walk(g.body, bound | {g.var}))
        raise TypeError(g)

    f = mc.rename_apart(walk(raw, frozenset()))
    mc.check_monotone(f)
    return f


def parse_model(text: str, file: str = "<input>") -> ModelDocument:
    p = _Parser(tokenize(text, file), file)
    return p.document(ModelDocument())


def parse_formula(text: str, template: ProcessTemplate):
    p = _Parser(tokenize(text, "<formula>"), "<formula>")
    p.skip_nl = 1
    raw = p.formula()
    if p.peek().kind != "eof":
        p.fail(f"unexpected {p.peek().value!r} after formula")
    return resolve_formula(raw, template)


# -- pretty printing ------------------------------------------------------

def _template_text(t: ProcessTemplate) -> list:
    lines = [f"template {t.name} {{"]
    for v in t.variables:
        if v.kind == "internal":
            if v.domain.name == f"{t.name}.{v.name}":
                lines.append(f"  internal {v.name} {{ {', '.join(v.domain.values)} }}")
            else:
                lines.append(f"  internal {v.name} : {v.domain.name}")
        else:
            lines.append(f"  port {v.name} : {v.domain.name} {v.mode}")
    lines.append(f"  init {ex.to_text(t.init)}")
    for c in t.commands:
        ups = ", ".join(f"{u.target} := {u.source.name}" for u in c.updates) or "skip"
        lines.append(f"  trans {c.name}: {ex.to_text(c.guard)} -> {ups}")
    for name, e in t.props:
        lines.append(f"  prop {name} := {ex.to_text(e)}")
    return lines


def pretty_print(doc: ModelDocument) -> str:
    out = [HEADER]
    for d in doc.domains.values():
        out.append(f"domain {d.name} {{ {', '.join(d.values)} }}")
    for t in doc.templates.values():
        lines = _template_text(t)
        for f in doc.formulas.values():
            if f.template == t.name:
                lines.append(f"  formula {f.name} := {mc.to_text(f.formula)}")
        lines.append("}")
        out.append("\n".join(lines))
    for net in doc.networks.values():
        lines = [f"network {net.name} {{"]
        for n in net.nodes:
            lines.append(f"  node {n} : {net.template(n).name}")
        for e, d in net.edges:
            lines.append(f"  edge {e} : {d.name}")
        for n, a in net.assignment:
            if a.ports:
                binds = ", ".join(f"{p} = {e}" for p, e in a.ports)
                lines.append(f"  connect {n} {{ {binds} }}")
        if net.initially is not None:
            lines.append(f"  initially {ex.to_text(net.initially)}")
        lines.append("}")
        out.append("\n".join(lines))
    for ts in doc.tilesets.values():
        lines = [f"tiles {ts.name} {{"]
        for tile in ts.tiles:
            dirs = " ; ".join(f"dir {d} -> {t}.{d2}" for d, t, d2 in tile.dirs)
            lines.append(f"  tile {tile.type} {{ {dirs} }}")
        lines.append("}")
        out.append("\n".join(lines))
    return "\n\n".join(out) + "\n"
