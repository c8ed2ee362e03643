#include "bnmc/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "bnmc/dist.hpp"

namespace bnmc {

namespace {

enum class Tok {
  End, Ident, IntLit, RealLit,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Colon, Semi, Dot, DotDot, Assign, EqEq,
  Plus, Minus, Star,
};

struct Token {
  Tok kind;
  std::string text;
  long long ival = 0;
  double dval = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      return;
    }
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        bump();
      }
      tok_.kind = Tok::Ident;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number();
      return;
    }
    switch (c) {
      case '(': one(Tok::LParen); return;
      case ')': one(Tok::RParen); return;
      case '{': one(Tok::LBrace); return;
      case '}': one(Tok::RBrace); return;
      case '[': one(Tok::LBracket); return;
      case ']': one(Tok::RBracket); return;
      case ',': one(Tok::Comma); return;
      case ':': one(Tok::Colon); return;
      case ';': one(Tok::Semi); return;
      case '+': one(Tok::Plus); return;
      case '-': one(Tok::Minus); return;
      case '*': one(Tok::Star); return;
      case '.':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '.') {
          bump();
          tok_.kind = Tok::DotDot;
        } else {
          tok_.kind = Tok::Dot;
        }
        return;
      case '=':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          bump();
          tok_.kind = Tok::EqEq;
        } else {
          tok_.kind = Tok::Assign;
        }
        return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }
  }

  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
    bool is_real = false;
    // A '.' starts a fraction only if a digit follows; "1..N" stays integral.
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      is_real = true;
      bump();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      is_real = true;
      bump();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) bump();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (is_real) {
      tok_.kind = Tok::RealLit;
      tok_.dval = std::stod(text);
    } else {
      tok_.kind = Tok::IntLit;
      tok_.ival = std::stoll(text);
    }
    tok_.text = text;
  }

  void one(Tok k) {
    bump();
    tok_.kind = k;
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
      if (pos_ < src_.size() && src_[pos_] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

PExprPtr mk(PExpr e) { return std::make_shared<const PExpr>(std::move(e)); }

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  ModelAst parse() {
    expect_kw("model");
    expect(Tok::LParen, "(");
    ModelAst m;
    if (lex_.peek().kind != Tok::RParen) {
      for (;;) {
        m.hypers.push_back(parse_param());
        if (lex_.peek().kind != Tok::Comma) break;
        lex_.take();
      }
    }
    expect(Tok::RParen, ")");
    expect(Tok::LBrace, "{");
    parse_stmts(m, {});
    expect(Tok::RBrace, "}");
    if (lex_.peek().kind != Tok::End) fail("trailing input after model");
    return m;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, lex_.peek().line, lex_.peek().col);
  }

  Token expect(Tok k, const char* what) {
    if (lex_.peek().kind != k) fail(std::string("expected '") + what + "'");
    return lex_.take();
  }

  void expect_kw(const char* kw) {
    if (lex_.peek().kind != Tok::Ident || lex_.peek().text != kw) {
      fail(std::string("expected '") + kw + "'");
    }
    lex_.take();
  }

  bool at_kw(const char* kw) const {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
  }

  HyperParam parse_param() {
    Token name = expect(Tok::Ident, "parameter name");
    expect(Tok::Colon, ":");
    Token ty = expect(Tok::Ident, "type");
    HyperType t;
    if (ty.text == "int") {
      t = HyperType::Int;
      if (lex_.peek().kind == Tok::LBracket) {
        lex_.take();
        expect(Tok::RBracket, "]");
        t = HyperType::IntArray;
      }
    } else if (ty.text == "real") {
      t = HyperType::Real;
    } else {
      throw ParseError("unknown parameter type '" + ty.text + "'", ty.line, ty.col);
    }
    return {name.text, t};
  }

  void parse_stmts(ModelAst& m, const std::vector<PlateAst>& plates) {
    while (lex_.peek().kind != Tok::RBrace && lex_.peek().kind != Tok::End) {
      if (lex_.peek().kind == Tok::Semi) {
        lex_.take();
        continue;
      }
      if (at_kw("observe")) {
        parse_observe(m);
      } else if (at_kw("for")) {
        parse_for(m, plates);
      } else if (at_kw("if")) {
        parse_if(m, plates);
      } else {
        parse_decl(m, plates);
      }
    }
  }

  void parse_observe(ModelAst& m) {
    lex_.take();
    expect(Tok::LParen, "(");
    if (lex_.peek().kind != Tok::RParen) {
      for (;;) {
        Token name = expect(Tok::Ident, "variable name");
        bool dup = false;
        for (const auto& o : m.observed) dup = dup || o == name.text;
        if (!dup) m.observed.push_back(name.text);
        if (lex_.peek().kind != Tok::Comma) break;
        lex_.take();
      }
    }
    expect(Tok::RParen, ")");
  }

  void parse_for(ModelAst& m, std::vector<PlateAst> plates) {
    lex_.take();
    expect(Tok::LParen, "(");
    Token idx = expect(Tok::Ident, "loop index");
    expect_kw("in");
    Token one = expect(Tok::IntLit, "1");
    if (one.ival != 1) throw ParseError("loop ranges start at 1", one.line, one.col);
    expect(Tok::DotDot, "..");
    PExprPtr count = parse_expr();
    expect(Tok::RParen, ")");
    expect(Tok::LBrace, "{");
    plates.push_back({idx.text, count});
    parse_stmts(m, plates);
    expect(Tok::RBrace, "}");
  }

  // `if (index == value) { decl } else { decl }` — both arms must declare the
  // same random variable; the arms become two clauses of one declaration.
  void parse_if(ModelAst& m, const std::vector<PlateAst>& plates) {
    Token kw = lex_.take();
    if (plates.empty()) throw ParseError("if is only allowed inside for", kw.line, kw.col);
    expect(Tok::LParen, "(");
    Token idx = expect(Tok::Ident, "plate index");
    if (idx.text != plates.back().index) {
      throw ParseError("if must test the innermost loop index", idx.line, idx.col);
    }
    expect(Tok::EqEq, "==");
    PExprPtr value = parse_expr();
    expect(Tok::RParen, ")");
    expect(Tok::LBrace, "{");
    DeclAst then_decl = parse_single_random_decl(plates);
    expect(Tok::RBrace, "}");
    expect_kw("else");
    expect(Tok::LBrace, "{");
    DeclAst else_decl = parse_single_random_decl(plates);
    expect(Tok::RBrace, "}");
    if (then_decl.name != else_decl.name) {
      throw ParseError("if/else arms must declare the same variable", kw.line, kw.col);
    }
    if ((then_decl.sample_count != nullptr) != (else_decl.sample_count != nullptr)) {
      throw ParseError("if/else arms must use the same sample arity", kw.line, kw.col);
    }
    DeclAst merged = then_decl;
    merged.clauses[0].guard_value = value;
    merged.clauses[0].guard_negated = false;
    ClauseAst other = else_decl.clauses[0];
    other.guard_value = value;
    other.guard_negated = true;
    merged.clauses.push_back(other);
    m.decls.push_back(std::move(merged));
  }

  DeclAst parse_single_random_decl(const std::vector<PlateAst>& plates) {
    ModelAst tmp;
    parse_decl(tmp, plates);
    if (tmp.decls.size() != 1 || !tmp.decls[0].random) {
      fail("if/else arm must contain exactly one random declaration");
    }
    return tmp.decls[0];
  }

  void parse_decl(ModelAst& m, const std::vector<PlateAst>& plates) {
    Token name = expect(Tok::Ident, "declaration");
    expect(Tok::Assign, "=");
    DeclAst d;
    d.name = name.text;
    d.plates = plates;

    if (at_kw("vector")) {
      lex_.take();
      expect(Tok::LParen, "(");
      d.vec_len = parse_expr();
      expect(Tok::Comma, ",");
      d.vec_fill = parse_expr();
      expect(Tok::RParen, ")");
      d.det_vector = true;
      m.decls.push_back(std::move(d));
      return;
    }

    PExprPtr e = parse_expr();
    if (lex_.peek().kind == Tok::Dot) {
      lex_.take();
      expect_kw("sample");
      expect(Tok::LParen, "(");
      if (lex_.peek().kind != Tok::RParen) d.sample_count = parse_expr();
      expect(Tok::RParen, ")");
      d.random = true;
      d.clauses.push_back(make_clause(e, name));
      m.decls.push_back(std::move(d));
      return;
    }
    d.det_value = e;
    m.decls.push_back(std::move(d));
  }

  ClauseAst make_clause(const PExprPtr& e, const Token& at) {
    if (e->kind != PExprKind::Apply) {
      throw ParseError(".sample() requires a distribution call", at.line, at.col);
    }
    Family fam;
    if (!lookup_family(e->name, &fam)) {
      throw ParseError("unknown distribution family '" + e->name + "'", at.line, at.col);
    }
    if (static_cast<int>(e->args.size()) != family_arity(fam)) {
      throw ParseError(std::string(family_name(fam)) + " takes " +
                           std::to_string(family_arity(fam)) + " arguments, got " +
                           std::to_string(e->args.size()),
                       at.line, at.col);
    }
    ClauseAst c;
    c.dist.family = e->name;
    c.dist.args = e->args;
    return c;
  }

  PExprPtr parse_expr() { return parse_addsub(); }

  PExprPtr parse_addsub() {
    PExprPtr lhs = parse_mul();
    while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
      const bool add = lex_.take().kind == Tok::Plus;
      PExprPtr rhs = parse_mul();
      PExpr e;
      e.kind = PExprKind::Bin;
      e.op = add ? PBinOp::Add : PBinOp::Sub;
      e.args = {lhs, rhs};
      lhs = mk(std::move(e));
    }
    return lhs;
  }

  PExprPtr parse_mul() {
    PExprPtr lhs = parse_unary();
    while (lex_.peek().kind == Tok::Star) {
      lex_.take();
      PExprPtr rhs = parse_unary();
      PExpr e;
      e.kind = PExprKind::Bin;
      e.op = PBinOp::Mul;
      e.args = {lhs, rhs};
      lhs = mk(std::move(e));
    }
    return lhs;
  }

  PExprPtr parse_unary() {
    if (lex_.peek().kind == Tok::Minus) {
      Token t = lex_.take();
      PExprPtr v = parse_unary();
      if (v->kind == PExprKind::IntLit) {
        PExpr e;
        e.kind = PExprKind::IntLit;
        e.ival = -v->ival;
        return mk(std::move(e));
      }
      if (v->kind == PExprKind::RealLit) {
        PExpr e;
        e.kind = PExprKind::RealLit;
        e.dval = -v->dval;
        return mk(std::move(e));
      }
      // 0 - v
      PExpr zero;
      zero.kind = PExprKind::IntLit;
      zero.ival = 0;
      PExpr e;
      e.kind = PExprKind::Bin;
      e.op = PBinOp::Sub;
      e.args = {mk(std::move(zero)), v};
      return mk(std::move(e));
    }
    return parse_primary();
  }

  PExprPtr parse_two_arg(PExprKind kind) {
    lex_.take();
    expect(Tok::LParen, "(");
    PExprPtr a = parse_expr();
    expect(Tok::Comma, ",");
    PExprPtr b = parse_expr();
    expect(Tok::RParen, ")");
    PExpr e;
    e.kind = kind;
    e.args = {a, b};
    return mk(std::move(e));
  }

  PExprPtr parse_primary() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::IntLit: {
        PExpr e;
        e.kind = PExprKind::IntLit;
        e.ival = lex_.take().ival;
        return mk(std::move(e));
      }
      case Tok::RealLit: {
        PExpr e;
        e.kind = PExprKind::RealLit;
        e.dval = lex_.take().dval;
        return mk(std::move(e));
      }
      case Tok::LParen: {
        lex_.take();
        PExprPtr e = parse_expr();
        expect(Tok::RParen, ")");
        return e;
      }
      case Tok::Ident: {
        if (t.text == "pow") return parse_two_arg(PExprKind::Pow);
        if (t.text == "max") return parse_two_arg(PExprKind::Max);
        if (t.text == "min") return parse_two_arg(PExprKind::Min);
        if (t.text == "sum") return parse_sum();
        Token name = lex_.take();
        if (lex_.peek().kind == Tok::LParen) {
          lex_.take();
          PExpr e;
          e.kind = PExprKind::Apply;
          e.name = name.text;
          if (lex_.peek().kind != Tok::RParen) {
            for (;;) {
              e.args.push_back(parse_expr());
              if (lex_.peek().kind != Tok::Comma) break;
              lex_.take();
            }
          }
          expect(Tok::RParen, ")");
          return mk(std::move(e));
        }
        PExpr e;
        e.kind = PExprKind::Ref;
        e.name = name.text;
        return mk(std::move(e));
      }
      default:
        fail("expected expression");
    }
  }

  PExprPtr parse_sum() {
    lex_.take();
    expect(Tok::LParen, "(");
    Token idx = expect(Tok::Ident, "sum index");
    expect_kw("in");
    Token one = expect(Tok::IntLit, "1");
    if (one.ival != 1) throw ParseError("sum ranges start at 1", one.line, one.col);
    expect(Tok::DotDot, "..");
    PExprPtr count = parse_expr();
    expect(Tok::Comma, ",");
    PExprPtr body = parse_expr();
    expect(Tok::RParen, ")");
    PExpr e;
    e.kind = PExprKind::Sum;
    e.name = idx.text;
    e.args = {count, body};
    return mk(std::move(e));
  }

  Lexer lex_;
};

}  // namespace

ModelAst parse_model(std::string_view source) { return Parser(source).parse(); }

// --- structural equality and printing ---------------------------------------

bool equal(const PExprPtr& a, const PExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case PExprKind::IntLit: return a->ival == b->ival;
    case PExprKind::RealLit: return a->dval == b->dval;
    case PExprKind::Ref: return a->name == b->name;
    default: break;
  }
  if (a->name != b->name) return false;
  if (a->kind == PExprKind::Bin && a->op != b->op) return false;
  if (a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i) {
    if (!equal(a->args[i], b->args[i])) return false;
  }
  return true;
}

namespace {

void print_expr(std::ostringstream& os, const PExprPtr& e) {
  switch (e->kind) {
    case PExprKind::IntLit: os << e->ival; return;
    case PExprKind::RealLit: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << e->dval;
      std::string s = tmp.str();
      if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
          s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
      }
      os << s;
      return;
    }
    case PExprKind::Ref: os << e->name; return;
    case PExprKind::Apply: {
      os << e->name << "(";
      for (std::size_t i = 0; i < e->args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, e->args[i]);
      }
      os << ")";
      return;
    }
    case PExprKind::Bin: {
      os << "(";
      print_expr(os, e->args[0]);
      os << (e->op == PBinOp::Add ? " + " : e->op == PBinOp::Sub ? " - " : " * ");
      print_expr(os, e->args[1]);
      os << ")";
      return;
    }
    case PExprKind::Pow:
    case PExprKind::Max:
    case PExprKind::Min: {
      os << (e->kind == PExprKind::Pow ? "pow" : e->kind == PExprKind::Max ? "max" : "min") << "(";
      print_expr(os, e->args[0]);
      os << ", ";
      print_expr(os, e->args[1]);
      os << ")";
      return;
    }
    case PExprKind::Sum: {
      os << "sum(" << e->name << " in 1..";
      print_expr(os, e->args[0]);
      os << ", ";
      print_expr(os, e->args[1]);
      os << ")";
      return;
    }
  }
}

void print_dist(std::ostringstream& os, const DistRefAst& d) {
  os << d.family << "(";
  for (std::size_t i = 0; i < d.args.size(); ++i) {
    if (i) os << ", ";
    print_expr(os, d.args[i]);
  }
  os << ")";
}

void indent(std::ostringstream& os, std::size_t depth) {
  for (std::size_t i = 0; i < depth; ++i) os << "  ";
}

}  // namespace

std::string to_string(const PExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

std::string pretty_print(const ModelAst& m) {
  std::ostringstream os;
  os << "model(";
  for (std::size_t i = 0; i < m.hypers.size(); ++i) {
    if (i) os << ", ";
    os << m.hypers[i].name << ": ";
    switch (m.hypers[i].type) {
      case HyperType::Int: os << "int"; break;
      case HyperType::Real: os << "real"; break;
      case HyperType::IntArray: os << "int[]"; break;
    }
  }
  os << ") {\n";

  std::vector<std::string> open;  // currently open loop indices
  auto close_to = [&](std::size_t depth) {
    while (open.size() > depth) {
      open.pop_back();
      indent(os, open.size() + 1);
      os << "}\n";
    }
  };

  for (const auto& d : m.decls) {
    // Close or open loops to match this declaration's plate context.
    std::size_t common = 0;
    while (common < open.size() && common < d.plates.size() &&
           open[common] == d.plates[common].index) {
      ++common;
    }
    close_to(common);
    for (std::size_t i = open.size(); i < d.plates.size(); ++i) {
      indent(os, i + 1);
      os << "for (" << d.plates[i].index << " in 1..";
      print_expr(os, d.plates[i].count);
      os << ") {\n";
      open.push_back(d.plates[i].index);
    }

    indent(os, d.plates.size() + 1);
    if (!d.random) {
      os << d.name << " = ";
      if (d.det_vector) {
        os << "vector(";
        print_expr(os, d.vec_len);
        os << ", ";
        print_expr(os, d.vec_fill);
        os << ")";
      } else {
        print_expr(os, d.det_value);
      }
      os << "\n";
      continue;
    }
    if (d.clauses.size() == 2) {
      os << "if (" << d.plates.back().index << " == ";
      print_expr(os, *d.clauses[0].guard_value);
      os << ") { " << d.name << " = ";
      print_dist(os, d.clauses[0].dist);
      os << ".sample(";
      if (d.sample_count) print_expr(os, d.sample_count);
      os << ") } else { " << d.name << " = ";
      print_dist(os, d.clauses[1].dist);
      os << ".sample(";
      if (d.sample_count) print_expr(os, d.sample_count);
      os << ") }\n";
      continue;
    }
    os << d.name << " = ";
    print_dist(os, d.clauses[0].dist);
    os << ".sample(";
    if (d.sample_count) print_expr(os, d.sample_count);
    os << ")\n";
  }
  close_to(0);

  if (!m.observed.empty()) {
    os << "  observe(";
    for (std::size_t i = 0; i < m.observed.size(); ++i) {
      if (i) os << ", ";
      os << m.observed[i];
    }
    os << ")\n";
  }
  os << "}\n";
  return os.str();
}

namespace {

bool equal_dist(const DistRefAst& a, const DistRefAst& b) {
  if (a.family != b.family || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!equal(a.args[i], b.args[i])) return false;
  }
  return true;
}

bool equal_decl(const DeclAst& a, const DeclAst& b) {
  if (a.name != b.name || a.random != b.random || a.det_vector != b.det_vector) return false;
  if (a.plates.size() != b.plates.size()) return false;
  for (std::size_t i = 0; i < a.plates.size(); ++i) {
    if (a.plates[i].index != b.plates[i].index) return false;
    if (!equal(a.plates[i].count, b.plates[i].count)) return false;
  }
  if (a.random) {
    if ((a.sample_count != nullptr) != (b.sample_count != nullptr)) return false;
    if (a.sample_count && !equal(a.sample_count, b.sample_count)) return false;
    if (a.clauses.size() != b.clauses.size()) return false;
    for (std::size_t i = 0; i < a.clauses.size(); ++i) {
      const auto& ca = a.clauses[i];
      const auto& cb = b.clauses[i];
      if (ca.guard_value.has_value() != cb.guard_value.has_value()) return false;
      if (ca.guard_value && !equal(*ca.guard_value, *cb.guard_value)) return false;
      if (ca.guard_negated != cb.guard_negated) return false;
      if (!equal_dist(ca.dist, cb.dist)) return false;
    }
    return true;
  }
  if (a.det_vector) return equal(a.vec_len, b.vec_len) && equal(a.vec_fill, b.vec_fill);
  return equal(a.det_value, b.det_value);
}

}  // namespace

bool equal(const ModelAst& a, const ModelAst& b) {
  if (a.hypers.size() != b.hypers.size() || a.decls.size() != b.decls.size() ||
      a.observed != b.observed) {
    return false;
  }
  for (std::size_t i = 0; i < a.hypers.size(); ++i) {
    if (a.hypers[i].name != b.hypers[i].name || a.hypers[i].type != b.hypers[i].type) return false;
  }
  for (std::size_t i = 0; i < a.decls.size(); ++i) {
    if (!equal_decl(a.decls[i], b.decls[i])) return false;
  }
  return true;
}

}  // namespace bnmc
