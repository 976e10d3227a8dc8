#pragma once

#include <memory>
#include <string>

#include "hpf/function.hpp"

namespace hpf {
namespace expr {

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

// Grammar: + - * / ^, unary minus, parentheses, the variable (x or s),
// numbers, pi, e, and the calls exp, log, sin, cos, sqrt.
NodePtr parse(const std::string& source);

NodePtr differentiate(const NodePtr& n);
NodePtr simplify(const NodePtr& n);
double evaluate(const NodePtr& n, double x);
std::string to_string(const NodePtr& n);

// Handle with exact symbolic derivatives of every order (computed lazily)
// and, when the expression contains sin(c/x) or cos(c/x) factors, structural
// breakpoints at the oscillation zeros for panel alignment.
FunctionHandle to_handle(const NodePtr& n, const std::string& label);

// parse + to_handle, labeled by the source text.
FunctionHandle make_handle(const std::string& source);

}  // namespace expr
}  // namespace hpf
