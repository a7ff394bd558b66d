#include "oulab/expression.hpp"

#include "oulab/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace oulab {

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Log, Sqrt, Abs, Sign, Min, Max, SelectLe };

struct Expression::Node {
  Op op = Op::Const;
  double value = 0.0;
  int index = 0;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(int i) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Var;
  n->index = i;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

double eval(const Expression::Node& n, std::span<const double> vars);

NodePtr make(Op op, std::vector<NodePtr> args) {
  // Constant folding keeps derivative trees small.
  const bool all_const = std::all_of(args.begin(), args.end(), [](const NodePtr& a) { return a->op == Op::Const; });
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  if (all_const) return make_const(eval(*n, {}));
  switch (op) {
    case Op::Add:
      if (is_const(n->args[0], 0.0)) return n->args[1];
      if (is_const(n->args[1], 0.0)) return n->args[0];
      break;
    case Op::Sub:
      if (is_const(n->args[1], 0.0)) return n->args[0];
      if (is_const(n->args[0], 0.0)) return make(Op::Neg, {n->args[1]});
      break;
    case Op::Mul:
      if (is_const(n->args[0], 0.0) || is_const(n->args[1], 0.0)) return make_const(0.0);
      if (is_const(n->args[0], 1.0)) return n->args[1];
      if (is_const(n->args[1], 1.0)) return n->args[0];
      break;
    case Op::Div:
      if (is_const(n->args[0], 0.0)) return make_const(0.0);
      if (is_const(n->args[1], 1.0)) return n->args[0];
      break;
    case Op::Neg:
      if (n->args[0]->op == Op::Neg) return n->args[0]->args[0];
      break;
    default:
      break;
  }
  return n;
}

double eval(const Expression::Node& n, std::span<const double> vars) {
  auto a = [&](int i) { return eval(*n.args[static_cast<std::size_t>(i)], vars); };
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return vars[static_cast<std::size_t>(n.index)];
    case Op::Add: return a(0) + a(1);
    case Op::Sub: return a(0) - a(1);
    case Op::Mul: return a(0) * a(1);
    case Op::Div: return a(0) / a(1);
    case Op::Neg: return -a(0);
    case Op::Pow: return std::pow(a(0), a(1));
    case Op::Sin: return std::sin(a(0));
    case Op::Cos: return std::cos(a(0));
    case Op::Exp: return std::exp(a(0));
    case Op::Log: return std::log(a(0));
    case Op::Sqrt: return std::sqrt(a(0));
    case Op::Abs: return std::abs(a(0));
    case Op::Sign: {
      const double v = a(0);
      return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    case Op::Min: return std::min(a(0), a(1));
    case Op::Max: return std::max(a(0), a(1));
    case Op::SelectLe: return a(0) <= a(1) ? a(2) : a(3);
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, int k) {
  const auto& g = n->args;
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(n->index == k ? 1.0 : 0.0);
    case Op::Add: return make(Op::Add, {diff(g[0], k), diff(g[1], k)});
    case Op::Sub: return make(Op::Sub, {diff(g[0], k), diff(g[1], k)});
    case Op::Mul:
      return make(Op::Add, {make(Op::Mul, {diff(g[0], k), g[1]}), make(Op::Mul, {g[0], diff(g[1], k)})});
    case Op::Div: {
      // (f/g)' = (f' g - f g') / g^2
      auto num = make(Op::Sub, {make(Op::Mul, {diff(g[0], k), g[1]}), make(Op::Mul, {g[0], diff(g[1], k)})});
      return make(Op::Div, {num, make(Op::Mul, {g[1], g[1]})});
    }
    case Op::Neg: return make(Op::Neg, {diff(g[0], k)});
    case Op::Pow: {
      if (g[1]->op == Op::Const) {
        const double e = g[1]->value;
        auto outer = make(Op::Mul, {make_const(e), make(Op::Pow, {g[0], make_const(e - 1.0)})});
        return make(Op::Mul, {outer, diff(g[0], k)});
      }
      // d(f^h) = f^h (h' log f + h f'/f)
      auto t1 = make(Op::Mul, {diff(g[1], k), make(Op::Log, {g[0]})});
      auto t2 = make(Op::Div, {make(Op::Mul, {g[1], diff(g[0], k)}), g[0]});
      return make(Op::Mul, {n, make(Op::Add, {t1, t2})});
    }
    case Op::Sin: return make(Op::Mul, {make(Op::Cos, {g[0]}), diff(g[0], k)});
    case Op::Cos: return make(Op::Neg, {make(Op::Mul, {make(Op::Sin, {g[0]}), diff(g[0], k)})});
    case Op::Exp: return make(Op::Mul, {n, diff(g[0], k)});
    case Op::Log: return make(Op::Div, {diff(g[0], k), g[0]});
    case Op::Sqrt: return make(Op::Div, {diff(g[0], k), make(Op::Mul, {make_const(2.0), n})});
    case Op::Abs: return make(Op::Mul, {make(Op::Sign, {g[0]}), diff(g[0], k)});
    case Op::Sign: return make_const(0.0);
    case Op::Min: return make(Op::SelectLe, {g[0], g[1], diff(g[0], k), diff(g[1], k)});
    case Op::Max: return make(Op::SelectLe, {g[1], g[0], diff(g[0], k), diff(g[1], k)});
    case Op::SelectLe: return make(Op::SelectLe, {g[0], g[1], diff(g[2], k), diff(g[3], k)});
  }
  return make_const(0.0);
}

void print(const NodePtr& n, std::ostringstream& os) {
  const auto& g = n->args;
  auto bin = [&](const char* sym) {
    os << '(';
    print(g[0], os);
    os << sym;
    print(g[1], os);
    os << ')';
  };
  auto fn = [&](const char* name) {
    os << name << '(';
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i) os << ',';
      print(g[i], os);
    }
    os << ')';
  };
  switch (n->op) {
    case Op::Const: os.precision(17); os << n->value; break;
    case Op::Var: os << "$" << n->index; break;
    case Op::Add: bin("+"); break;
    case Op::Sub: bin("-"); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Pow: bin("^"); break;
    case Op::Neg: os << "(-"; print(g[0], os); os << ')'; break;
    case Op::Sin: fn("sin"); break;
    case Op::Cos: fn("cos"); break;
    case Op::Exp: fn("exp"); break;
    case Op::Log: fn("log"); break;
    case Op::Sqrt: fn("sqrt"); break;
    case Op::Abs: fn("abs"); break;
    case Op::Sign: fn("sign"); break;
    case Op::Min: fn("min"); break;
    case Op::Max: fn("max"); break;
    case Op::SelectLe: fn("select_le"); break;
  }
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : text_(text) {
    for (std::size_t i = 0; i < vars.size(); ++i) names_[vars[i]] = static_cast<int>(i);
    if (vars.size() == 2 && vars[1] == "x1") names_["x"] = 1;
  }

  NodePtr parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "expression \"" << text_ << "\": " << msg << " at offset " << pos_;
    throw ParseError(os.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, {lhs, term()});
      else if (accept('-')) lhs = make(Op::Sub, {lhs, term()});
      else return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, {lhs, unary()});
      else if (accept('/')) lhs = make(Op::Div, {lhs, unary()});
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = atom();
    if (accept('^')) return make(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (accept('(')) {
      auto e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return make_const(v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string id(text_.substr(start, pos_ - start));
    if (accept('(')) {
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      if (!accept(')')) fail("expected ')' after arguments of " + id);
      return call(id, std::move(args));
    }
    if (id == "pi") return make_const(3.14159265358979323846);
    auto it = names_.find(id);
    if (it == names_.end()) fail("unknown variable '" + id + "'");
    return make_var(it->second);
  }

  NodePtr call(const std::string& id, std::vector<NodePtr> args) {
    static const std::map<std::string, std::pair<Op, std::size_t>> table = {
        {"sin", {Op::Sin, 1}},   {"cos", {Op::Cos, 1}},   {"exp", {Op::Exp, 1}}, {"log", {Op::Log, 1}},
        {"sqrt", {Op::Sqrt, 1}}, {"abs", {Op::Abs, 1}},   {"min", {Op::Min, 2}}, {"max", {Op::Max, 2}},
    };
    auto it = table.find(id);
    if (it == table.end()) fail("unknown function '" + id + "'");
    if (args.size() != it->second.second) fail("wrong number of arguments to " + id);
    return make(it->second.first, std::move(args));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::map<std::string, int> names_;
};

}  // namespace

Expression::Expression() : root_(make_const(0.0)) {}

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables) {
  return Expression(Parser(text, variables).parse());
}

Expression Expression::constant(double value) { return Expression(make_const(value)); }

Expression Expression::variable(int index) { return Expression(make_var(index)); }

std::vector<std::string> Expression::time_variables() { return {"s"}; }

std::vector<std::string> Expression::space_time_variables(int n) {
  std::vector<std::string> v{"s"};
  for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

double Expression::operator()(std::span<const double> vars) const { return eval(*root_, vars); }

double Expression::at(double s) const {
  const double v[1] = {s};
  return eval(*root_, v);
}

double Expression::at(double s, const Vector& x) const {
  double v[kMaxDim + 1];
  v[0] = s;
  for (int i = 0; i < x.size(); ++i) v[i + 1] = x[i];
  return eval(*root_, std::span<const double>(v, static_cast<std::size_t>(x.size() + 1)));
}

Expression Expression::derivative(int index) const { return Expression(diff(root_, index)); }

bool Expression::is_constant() const { return root_->op == Op::Const; }

std::string Expression::to_string() const {
  std::ostringstream os;
  print(root_, os);
  return os.str();
}

Expression operator+(const Expression& a, const Expression& b) { return Expression(make(Op::Add, {a.root_, b.root_})); }
Expression operator-(const Expression& a, const Expression& b) { return Expression(make(Op::Sub, {a.root_, b.root_})); }
Expression operator*(const Expression& a, const Expression& b) { return Expression(make(Op::Mul, {a.root_, b.root_})); }
Expression operator/(const Expression& a, const Expression& b) { return Expression(make(Op::Div, {a.root_, b.root_})); }
Expression operator-(const Expression& a) { return Expression(make(Op::Neg, {a.root_})); }

}  // namespace oulab
