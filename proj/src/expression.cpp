#include "vexspec/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "vexspec/error.hpp"

namespace vexspec {

struct Expression::Node {
  enum class Kind { number, x, y, neg, add, sub, mul, div, pow, sin, cos, exp, abs, min, max };
  Kind kind = Kind::number;
  double value = 0.0;
  std::size_t column = 0;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

struct Function {
  std::string_view name;
  Kind kind;
  std::size_t arity;
};

constexpr Function kFunctions[] = {
    {"sin", Kind::sin, 1}, {"cos", Kind::cos, 1}, {"exp", Kind::exp, 1},
    {"abs", Kind::abs, 1}, {"min", Kind::min, 2}, {"max", Kind::max, 2},
};

class Parser {
public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

  bool uses_y = false;

private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_ + 1); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Kind k, std::size_t col, std::vector<NodePtr> args = {}, double v = 0.0) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->column = col;
    n->args = std::move(args);
    n->value = v;
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      skip();
      const std::size_t col = pos_ + 1;
      if (accept('+'))
        lhs = make(Kind::add, col, {lhs, term()});
      else if (accept('-'))
        lhs = make(Kind::sub, col, {lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      skip();
      const std::size_t col = pos_ + 1;
      if (accept('*'))
        lhs = make(Kind::mul, col, {lhs, unary()});
      else if (accept('/'))
        lhs = make(Kind::div, col, {lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    skip();
    const std::size_t col = pos_ + 1;
    if (accept('-')) return make(Kind::neg, col, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip();
    const std::size_t col = pos_ + 1;
    if (accept('^')) return make(Kind::pow, col, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const std::size_t col = pos_ + 1;
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string_view name = s_.substr(pos_, end - pos_);
      if (name == "x" || name == "y") {
        pos_ = end;
        if (name == "y") uses_y = true;
        return make(name == "x" ? Kind::x : Kind::y, col);
      }
      for (const Function& f : kFunctions) {
        if (f.name != name) continue;
        pos_ = end;
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        std::vector<NodePtr> args{expr()};
        while (accept(',')) args.push_back(expr());
        if (!accept(')')) fail("expected ')'");
        if (args.size() != f.arity)
          throw ParseError(std::string(name) + " takes " + std::to_string(f.arity) +
                               " argument(s), got " + std::to_string(args.size()),
                           col);
        return make(f.kind, col, std::move(args));
      }
      fail("unknown identifier '" + std::string(name) + "'");
    }
    if (accept('(')) {
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t col = pos_ + 1;
    const std::string tail(s_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(tail.c_str(), &end);
    if (end == tail.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - tail.c_str());
    return make(Kind::number, col, {}, v);
  }
};

double eval(const Node& n, double x, double y) {
  auto arg = [&](std::size_t i) { return eval(*n.args[i], x, y); };
  switch (n.kind) {
    case Kind::number: return n.value;
    case Kind::x: return x;
    case Kind::y: return y;
    case Kind::neg: return -arg(0);
    case Kind::add: return arg(0) + arg(1);
    case Kind::sub: return arg(0) - arg(1);
    case Kind::mul: return arg(0) * arg(1);
    case Kind::div: {
      const double d = arg(1);
      if (d == 0.0)
        throw DomainError("division by zero (column " + std::to_string(n.column) + ")");
      return arg(0) / d;
    }
    case Kind::pow: return std::pow(arg(0), arg(1));
    case Kind::sin: return std::sin(arg(0));
    case Kind::cos: return std::cos(arg(0));
    case Kind::exp: return std::exp(arg(0));
    case Kind::abs: return std::fabs(arg(0));
    case Kind::min: return std::min(arg(0), arg(1));
    case Kind::max: return std::max(arg(0), arg(1));
  }
  return 0.0;
}

std::string where(const std::array<double, 2>& pt, int dim) {
  std::string s = "x=" + std::to_string(pt[0]);
  if (dim == 2) s += ", y=" + std::to_string(pt[1]);
  return s;
}

double checked(const Expression& e, const std::array<double, 2>& pt, int dim) {
  try {
    return e(pt[0], pt[1]);
  } catch (const DomainError& err) {
    throw DomainError(std::string(err.what()) + " in '" + e.text() + "' at " + where(pt, dim));
  }
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse();
  e.text_ = std::string(text);
  e.uses_y_ = p.uses_y;
  return e;
}

double Expression::operator()(double x, double y) const {
  const double v = eval(*root_, x, y);
  if (!std::isfinite(v)) throw DomainError("non-finite value");
  return v;
}

CellField expression_eval(std::string_view expr, const StructuredGrid& g) {
  const Expression e = Expression::parse(expr);
  if (e.uses_y() && g.dim() == 1) throw DomainError("'" + e.text() + "' uses y on a 1D grid");
  CellField f;
  f.components = 1;
  f.data.resize(g.cell_count());
  for (std::size_t c = 0; c < f.data.size(); ++c) f.data[c] = checked(e, g.cell_center(c), g.dim());
  return f;
}

GridFunction expression_nodes(std::string_view expr, const StructuredGrid& g) {
  const Expression e = Expression::parse(expr);
  if (e.uses_y() && g.dim() == 1) throw DomainError("'" + e.text() + "' uses y on a 1D grid");
  std::vector<double> v(g.node_count(), 0.0);
  for (std::size_t n = 0; n < v.size(); ++n)
    if (!g.on_boundary(n)) v[n] = checked(e, g.node_coord(n), g.dim());
  return GridFunction::masked(g, std::move(v));
}

}  // namespace vexspec
