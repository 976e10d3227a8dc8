#include "hpf/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <vector>

namespace hpf {
namespace expr {

struct Node {
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
  Kind kind;
  double value = 0.0;  // Const
  std::string func;    // Call
  NodePtr a, b;
};

namespace {

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Const;
  n->value = v;
  return n;
}

NodePtr make_var() {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Var;
  return n;
}

NodePtr make_binary(Node::Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_neg(NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Neg;
  n->a = std::move(a);
  return n;
}

NodePtr make_call(std::string func, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Call;
  n->func = std::move(func);
  n->a = std::move(a);
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->kind == Node::Kind::Const && n->value == v;
}

// --- tokenizer / recursive descent parser ---

struct Parser {
  const std::string& src;
  std::size_t pos = 0;

  explicit Parser(const std::string& s) : src(s) {}

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = make_binary(Node::Kind::Add, lhs, parse_term());
      else if (eat('-'))
        lhs = make_binary(Node::Kind::Sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*'))
        lhs = make_binary(Node::Kind::Mul, lhs, parse_unary());
      else if (eat('/'))
        lhs = make_binary(Node::Kind::Div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make_neg(parse_unary());
    if (eat('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (eat('^')) return make_binary(Node::Kind::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos >= src.size()) throw ParseError("unexpected end of expression");
    const char c = src[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = 0;
      double v = std::stod(src.substr(pos), &end);
      pos += end;
      return make_const(v);
    }
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) throw ParseError("missing ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos;
      while (end < src.size() &&
             std::isalnum(static_cast<unsigned char>(src[end])))
        ++end;
      std::string name = src.substr(pos, end - pos);
      pos = end;
      if (name == "x" || name == "s") return make_var();
      if (name == "pi") return make_const(M_PI);
      if (name == "e") return make_const(M_E);
      if (name == "exp" || name == "log" || name == "sin" || name == "cos" ||
          name == "sqrt") {
        if (!eat('(')) throw ParseError(name + ": expected '('");
        NodePtr arg = parse_expr();
        if (!eat(')')) throw ParseError(name + ": missing ')'");
        return make_call(name, arg);
      }
      throw ParseError("unknown identifier '" + name + "'");
    }
    throw ParseError(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

NodePtr parse(const std::string& source) {
  Parser p(source);
  NodePtr n = p.parse_expr();
  p.skip_ws();
  if (p.pos != source.size())
    throw ParseError("trailing input at position " + std::to_string(p.pos));
  return simplify(n);
}

double evaluate(const NodePtr& n, double x) {
  switch (n->kind) {
    case Node::Kind::Const:
      return n->value;
    case Node::Kind::Var:
      return x;
    case Node::Kind::Add:
      return evaluate(n->a, x) + evaluate(n->b, x);
    case Node::Kind::Sub:
      return evaluate(n->a, x) - evaluate(n->b, x);
    case Node::Kind::Mul:
      return evaluate(n->a, x) * evaluate(n->b, x);
    case Node::Kind::Div:
      return evaluate(n->a, x) / evaluate(n->b, x);
    case Node::Kind::Pow:
      return std::pow(evaluate(n->a, x), evaluate(n->b, x));
    case Node::Kind::Neg:
      return -evaluate(n->a, x);
    case Node::Kind::Call: {
      const double v = evaluate(n->a, x);
      if (n->func == "exp") return std::exp(v);
      if (n->func == "log") return std::log(v);
      if (n->func == "sin") return std::sin(v);
      if (n->func == "cos") return std::cos(v);
      return std::sqrt(v);
    }
  }
  return 0.0;
}

NodePtr simplify(const NodePtr& n) {
  switch (n->kind) {
    case Node::Kind::Const:
    case Node::Kind::Var:
      return n;
    case Node::Kind::Neg: {
      NodePtr a = simplify(n->a);
      if (a->kind == Node::Kind::Const) return make_const(-a->value);
      if (a->kind == Node::Kind::Neg) return a->a;
      return make_neg(a);
    }
    case Node::Kind::Call: {
      NodePtr a = simplify(n->a);
      if (a->kind == Node::Kind::Const)
        return make_const(evaluate(make_call(n->func, a), 0.0));
      return make_call(n->func, a);
    }
    default:
      break;
  }
  NodePtr a = simplify(n->a);
  NodePtr b = simplify(n->b);
  if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const)
    return make_const(evaluate(make_binary(n->kind, a, b), 0.0));
  switch (n->kind) {
    case Node::Kind::Add:
      if (is_const(a, 0)) return b;
      if (is_const(b, 0)) return a;
      break;
    case Node::Kind::Sub:
      if (is_const(b, 0)) return a;
      if (is_const(a, 0)) return simplify(make_neg(b));
      break;
    case Node::Kind::Mul:
      if (is_const(a, 0) || is_const(b, 0)) return make_const(0);
      if (is_const(a, 1)) return b;
      if (is_const(b, 1)) return a;
      if (is_const(a, -1)) return simplify(make_neg(b));
      if (is_const(b, -1)) return simplify(make_neg(a));
      break;
    case Node::Kind::Div:
      if (is_const(a, 0)) return make_const(0);
      if (is_const(b, 1)) return a;
      break;
    case Node::Kind::Pow:
      if (is_const(b, 0)) return make_const(1);
      if (is_const(b, 1)) return a;
      if (is_const(a, 1)) return make_const(1);
      break;
    default:
      break;
  }
  return make_binary(n->kind, a, b);
}

NodePtr differentiate(const NodePtr& n) {
  switch (n->kind) {
    case Node::Kind::Const:
      return make_const(0);
    case Node::Kind::Var:
      return make_const(1);
    case Node::Kind::Add:
      return make_binary(Node::Kind::Add, differentiate(n->a),
                         differentiate(n->b));
    case Node::Kind::Sub:
      return make_binary(Node::Kind::Sub, differentiate(n->a),
                         differentiate(n->b));
    case Node::Kind::Mul:
      return make_binary(
          Node::Kind::Add,
          make_binary(Node::Kind::Mul, differentiate(n->a), n->b),
          make_binary(Node::Kind::Mul, n->a, differentiate(n->b)));
    case Node::Kind::Div:
      return make_binary(
          Node::Kind::Div,
          make_binary(
              Node::Kind::Sub,
              make_binary(Node::Kind::Mul, differentiate(n->a), n->b),
              make_binary(Node::Kind::Mul, n->a, differentiate(n->b))),
          make_binary(Node::Kind::Pow, n->b, make_const(2)));
    case Node::Kind::Pow: {
      if (n->b->kind == Node::Kind::Const) {
        // d a^c = c a^(c-1) a'
        return make_binary(
            Node::Kind::Mul, make_const(n->b->value),
            make_binary(Node::Kind::Mul,
                        make_binary(Node::Kind::Pow, n->a,
                                    make_const(n->b->value - 1.0)),
                        differentiate(n->a)));
      }
      // a^b = exp(b log a)
      NodePtr rewritten = make_call(
          "exp", make_binary(Node::Kind::Mul, n->b, make_call("log", n->a)));
      return differentiate(rewritten);
    }
    case Node::Kind::Neg:
      return make_neg(differentiate(n->a));
    case Node::Kind::Call: {
      NodePtr inner = differentiate(n->a);
      NodePtr outer;
      if (n->func == "exp")
        outer = make_call("exp", n->a);
      else if (n->func == "log")
        outer = make_binary(Node::Kind::Div, make_const(1), n->a);
      else if (n->func == "sin")
        outer = make_call("cos", n->a);
      else if (n->func == "cos")
        outer = make_neg(make_call("sin", n->a));
      else  // sqrt
        outer = make_binary(
            Node::Kind::Div, make_const(0.5),
            make_call("sqrt", n->a));
      return make_binary(Node::Kind::Mul, outer, inner);
    }
  }
  return make_const(0);
}

std::string to_string(const NodePtr& n) {
  switch (n->kind) {
    case Node::Kind::Const: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", n->value);
      return buf;
    }
    case Node::Kind::Var:
      return "x";
    case Node::Kind::Add:
      return "(" + to_string(n->a) + "+" + to_string(n->b) + ")";
    case Node::Kind::Sub:
      return "(" + to_string(n->a) + "-" + to_string(n->b) + ")";
    case Node::Kind::Mul:
      return "(" + to_string(n->a) + "*" + to_string(n->b) + ")";
    case Node::Kind::Div:
      return "(" + to_string(n->a) + "/" + to_string(n->b) + ")";
    case Node::Kind::Pow:
      return "(" + to_string(n->a) + "^" + to_string(n->b) + ")";
    case Node::Kind::Neg:
      return "(-" + to_string(n->a) + ")";
    case Node::Kind::Call:
      return n->func + "(" + to_string(n->a) + ")";
  }
  return "?";
}

namespace {

// Matches c/x (also k*(c/x)); the scale governs oscillation zero placement.
bool as_c_over_x(const NodePtr& n, double* c) {
  if (n->kind == Node::Kind::Div && n->a->kind == Node::Kind::Const &&
      n->b->kind == Node::Kind::Var) {
    *c = n->a->value;
    return true;
  }
  if (n->kind == Node::Kind::Mul && n->a->kind == Node::Kind::Const) {
    double inner;
    if (as_c_over_x(n->b, &inner)) {
      *c = n->a->value * inner;
      return true;
    }
  }
  if (n->kind == Node::Kind::Pow && n->a->kind == Node::Kind::Var &&
      n->b->kind == Node::Kind::Const && n->b->value == -1.0) {
    *c = 1.0;
    return true;
  }
  return false;
}

struct OscFactor {
  double scale;   // argument is scale / x
  bool is_sine;   // zeros at scale/(k pi) vs scale/((k+1/2) pi)
};

void collect_osc(const NodePtr& n, std::vector<OscFactor>* out) {
  if (n->kind == Node::Kind::Call && (n->func == "sin" || n->func == "cos")) {
    double c;
    if (as_c_over_x(n->a, &c) && c > 0.0)
      out->push_back({c, n->func == "sin"});
  }
  if (n->a) collect_osc(n->a, out);
  if (n->b) collect_osc(n->b, out);
}

}  // namespace

FunctionHandle to_handle(const NodePtr& n, const std::string& label) {
  NodePtr root = simplify(n);
  FunctionHandle h(label, [root](double x) { return evaluate(root, x); },
                   FunctionHandle::kSmoothInfinity);

  // Lazy tower of exact derivatives: order m differentiates the cached
  // order m-1 tree. The shared cache lives in the generator closure.
  struct DerivCache {
    std::mutex m;
    std::vector<NodePtr> trees;  // trees[k] = k-th derivative
  };
  auto cache = std::make_shared<DerivCache>();
  cache->trees.push_back(root);
  auto gen = [cache](int order) -> std::optional<FunctionHandle::Eval> {
    std::lock_guard<std::mutex> lock(cache->m);
    while (static_cast<int>(cache->trees.size()) <= order)
      cache->trees.push_back(simplify(differentiate(cache->trees.back())));
    NodePtr tree = cache->trees[order];
    return FunctionHandle::Eval(
        [tree](double x) { return evaluate(tree, x); });
  };
  h = h.with_derivative_generator(gen, FunctionHandle::kSmoothInfinity);

  std::vector<OscFactor> osc;
  collect_osc(root, &osc);
  if (!osc.empty()) {
    h = h.with_breakpoints([osc](double lo, double hi, std::size_t budget)
                               -> std::vector<double> {
      std::vector<double> pts;
      for (const OscFactor& f : osc) {
        // zeros of the trig factor: arg = k pi (sin) or (k+1/2) pi (cos)
        const double shift = f.is_sine ? 0.0 : 0.5;
        double k_hi = f.scale / (M_PI * lo) - shift;
        double k_lo = f.scale / (M_PI * hi) - shift;
        if (k_hi < 1.0) continue;
        long k_start = std::max(1L, static_cast<long>(std::ceil(k_lo)));
        long k_end = static_cast<long>(std::floor(k_hi));
        // Emit from the large-x side; cap at budget+1 so callers can detect
        // that the window is denser than they can resolve.
        for (long k = k_start; k <= k_end; ++k) {
          pts.push_back(f.scale / (M_PI * (static_cast<double>(k) + shift)));
          if (pts.size() > budget) return pts;
        }
      }
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      return pts;
    });
  }
  return h;
}

FunctionHandle make_handle(const std::string& source) {
  return to_handle(parse(source), source);
}

}  // namespace expr
}  // namespace hpf
