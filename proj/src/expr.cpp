#include "dini/expr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <type_traits>
#include <unordered_map>

#include "dini/errors.hpp"
#include "dini/simd.hpp"

namespace dini {

// ---------------------------------------------------------------------------
// Nodes

NodePtr Node::constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = v;
  return n;
}

NodePtr Node::variable(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->var = index;
  return n;
}

NodePtr Node::unary(Op op, NodePtr operand) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(operand);
  return n;
}

NodePtr Node::binary(Op op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

namespace {

bool is_binary(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    default: return "?";
  }
}

std::optional<Op> function_op(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, Op>, 6> table{{
      {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp},
      {"ln", Op::Ln}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs},
  }};
  for (const auto& [n, op] : table) {
    if (n == name) return op;
  }
  return std::nullopt;
}

}  // namespace

bool same_tree(const Node& a, const Node& b) {
  if (&a == &b) return true;
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Constant:
      return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
    case Op::Variable:
      return a.var == b.var;
    default:
      break;
  }
  if (!same_tree(*a.lhs, *b.lhs)) return false;
  return !is_binary(a.op) || same_tree(*a.rhs, *b.rhs);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& variables)
      : text_(text), variables_(variables) {}

  NodePtr parse() {
    skip_space();
    if (pos_ == text_.size()) throw SyntaxError("empty expression", pos_);
    NodePtr e = expression();
    skip_space();
    if (pos_ != text_.size()) {
      throw SyntaxError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw SyntaxError(std::string("expected '") + c + "' before end of input", pos_);
      throw SyntaxError(std::string("expected '") + c + "' but found '" + text_[pos_] + "'", pos_);
    }
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Node::binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = Node::binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Node::binary(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = Node::binary(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return Node::unary(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return Node::binary(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++count;
      return count;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw SyntaxError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw SyntaxError("malformed exponent", start);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(value)) {
      throw SyntaxError("numeric literal out of range", start);
    }
    return Node::constant(value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const auto op = function_op(name);
      if (!op) throw UnknownIdentifier(name, start);
      ++pos_;
      NodePtr arg = expression();
      expect(')');
      return Node::unary(*op, arg);
    }
    for (std::size_t k = 0; k < variables_.size(); ++k) {
      if (variables_[k] == name) return Node::variable(k);
    }
    if (function_op(name)) throw SyntaxError("expected '(' after " + name, pos_);
    throw UnknownIdentifier(name, start);
  }

  std::string_view text_;
  const std::vector<std::string>& variables_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

int precedence(const Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void print_node(const Node& n, const std::vector<std::string>& vars, std::string& out);

void print_operand(const Node& n, int min_prec, const std::vector<std::string>& vars, std::string& out) {
  if (precedence(n) < min_prec) {
    out += '(';
    print_node(n, vars, out);
    out += ')';
  } else {
    print_node(n, vars, out);
  }
}

void print_node(const Node& n, const std::vector<std::string>& vars, std::string& out) {
  switch (n.op) {
    case Op::Constant:
      // Negative constants only arise from substitution; parenthesize them.
      if (std::signbit(n.value)) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case Op::Variable:
      out += vars[n.var];
      return;
    case Op::Add:
    case Op::Sub:
      print_operand(*n.lhs, 1, vars, out);
      out += n.op == Op::Add ? " + " : " - ";
      print_operand(*n.rhs, 2, vars, out);
      return;
    case Op::Mul:
    case Op::Div:
      print_operand(*n.lhs, 2, vars, out);
      out += n.op == Op::Mul ? "*" : "/";
      print_operand(*n.rhs, 3, vars, out);
      return;
    case Op::Pow:
      print_operand(*n.lhs, 5, vars, out);
      out += '^';
      print_operand(*n.rhs, 3, vars, out);
      return;
    case Op::Neg:
      out += '-';
      print_operand(*n.lhs, 3, vars, out);
      return;
    default:
      out += function_name(n.op);
      out += '(';
      print_node(*n.lhs, vars, out);
      out += ')';
      return;
  }
}

// ---------------------------------------------------------------------------
// Tape: postorder instruction list, one slot per instruction.

struct Instr {
  Op op;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double constant = 0.0;
  std::size_t var = 0;
  const Node* node = nullptr;
};

struct Program {
  std::vector<Instr> code;
};

std::uint32_t emit(const NodePtr& n, Program& prog, std::unordered_map<const Node*, std::uint32_t>& memo) {
  if (const auto it = memo.find(n.get()); it != memo.end()) return it->second;
  Instr in{n->op};
  in.node = n.get();
  if (n->op == Op::Constant) {
    in.constant = n->value;
  } else if (n->op == Op::Variable) {
    in.var = n->var;
  } else {
    in.a = emit(n->lhs, prog, memo);
    if (is_binary(n->op)) in.b = emit(n->rhs, prog, memo);
  }
  prog.code.push_back(in);
  const auto slot = static_cast<std::uint32_t>(prog.code.size() - 1);
  memo.emplace(n.get(), slot);
  return slot;
}

Program compile(const NodePtr& root) {
  Program prog;
  std::unordered_map<const Node*, std::uint32_t> memo;
  emit(root, prog, memo);
  return prog;
}

double value_of(double v) { return v; }
double value_of(Dual d) { return d.value; }
bool finite(double v) { return std::isfinite(v); }
bool finite(Dual d) { return std::isfinite(d.value) && std::isfinite(d.derivative); }

double apply(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return std::pow(a, b);
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return std::exp(a);
    case Op::Ln: return std::log(a);
    case Op::Sqrt: return std::sqrt(a);
    case Op::Abs: return std::fabs(a);
    default: return 0.0;
  }
}

Dual apply(Op op, Dual a, Dual b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return dual_rules::pow(a, b);
    case Op::Neg: return -a;
    case Op::Sin: return dual_rules::sin(a);
    case Op::Cos: return dual_rules::cos(a);
    case Op::Exp: return dual_rules::exp(a);
    case Op::Ln: return dual_rules::ln(a);
    case Op::Sqrt: return dual_rules::sqrt(a);
    case Op::Abs: return dual_rules::abs(a);
    default: return {};
  }
}

std::string domain_reason(Op op, double a, double b) {
  switch (op) {
    case Op::Div:
      if (b == 0.0) return "division by zero";
      break;
    case Op::Ln:
      if (a <= 0.0) return "ln of nonpositive argument";
      break;
    case Op::Sqrt:
      if (a < 0.0) return "sqrt of negative argument";
      if (a == 0.0) return "sqrt not differentiable at 0";
      break;
    case Op::Pow:
      if (a < 0.0 && std::trunc(b) != b) return "negative base with non-integer exponent";
      if (a == 0.0 && b < 1.0) return "power of zero with exponent below 1";
      break;
    default:
      break;
  }
  return "non-finite result";
}

}  // namespace

// ---------------------------------------------------------------------------
// ExprFunction

struct ExprFunction::Impl {
  std::vector<NodePtr> trees;
  std::vector<Program> programs;
  std::vector<std::string> variables;
  std::vector<std::string> source;

  void check_arity(std::span<const double> p) const {
    if (p.size() != variables.size()) {
      throw DimensionMismatch("expected " + std::to_string(variables.size()) + " inputs, got " +
                              std::to_string(p.size()));
    }
  }

  void check_component(std::size_t c) const {
    if (c >= trees.size()) throw DimensionMismatch("component index " + std::to_string(c) + " out of range");
  }

  void check_var(std::size_t j) const {
    if (j >= variables.size()) throw DimensionMismatch("variable index " + std::to_string(j) + " out of range");
  }

  // `seed(k)` gives the input for variable k.
  template <class T, class Seed>
  T run(std::size_t component, Seed&& seed) const {
    const auto& code = programs[component].code;
    std::vector<T> slots(code.size());
    for (std::size_t i = 0; i < code.size(); ++i) {
      const Instr& in = code[i];
      T r{};
      if (in.op == Op::Constant) {
        if constexpr (std::is_same_v<T, Dual>) {
          r = Dual::constant(in.constant);
        } else {
          r = in.constant;
        }
      } else if (in.op == Op::Variable) {
        r = seed(in.var);
      } else {
        const T a = slots[in.a];
        const T b = is_binary(in.op) ? slots[in.b] : T{};
        r = apply(in.op, a, b);
        if (!finite(r)) {
          std::string text;
          print_node(*in.node, variables, text);
          throw DomainError(domain_reason(in.op, value_of(a), value_of(b)) + " in '" + text +
                            "' (component " + std::to_string(component) + ")");
        }
      }
      slots[i] = r;
    }
    return slots.back();
  }
};

ExprFunction ExprFunction::parse(const std::vector<std::string>& components,
                                 std::vector<std::string> variables) {
  for (std::size_t k = 0; k < variables.size(); ++k) {
    for (std::size_t l = 0; l < k; ++l) {
      if (variables[k] == variables[l]) throw SyntaxError("duplicate variable '" + variables[k] + "'", 0);
    }
    if (function_op(variables[k])) throw SyntaxError("variable name '" + variables[k] + "' is a function", 0);
  }
  std::vector<NodePtr> trees;
  trees.reserve(components.size());
  for (const auto& text : components) trees.push_back(Parser(text, variables).parse());
  auto f = from_trees(std::move(trees), std::move(variables));
  auto impl = std::make_shared<Impl>(*f.impl_);
  impl->source = components;
  return ExprFunction(std::move(impl));
}

ExprFunction ExprFunction::from_trees(std::vector<NodePtr> components, std::vector<std::string> variables) {
  auto impl = std::make_shared<Impl>();
  impl->variables = std::move(variables);
  for (const auto& t : components) {
    impl->programs.push_back(compile(t));
    for (const auto& in : impl->programs.back().code) {
      if (in.op == Op::Variable && in.var >= impl->variables.size()) {
        throw UnknownIdentifier("#" + std::to_string(in.var), 0);
      }
    }
    std::string text;
    print_node(*t, impl->variables, text);
    impl->source.push_back(std::move(text));
  }
  impl->trees = std::move(components);
  return ExprFunction(std::move(impl));
}

std::size_t ExprFunction::num_components() const noexcept { return impl_->trees.size(); }
std::size_t ExprFunction::num_variables() const noexcept { return impl_->variables.size(); }
const std::vector<std::string>& ExprFunction::variables() const noexcept { return impl_->variables; }
const std::vector<std::string>& ExprFunction::source_text() const noexcept { return impl_->source; }

const NodePtr& ExprFunction::tree(std::size_t component) const {
  impl_->check_component(component);
  return impl_->trees[component];
}

std::string ExprFunction::print(std::size_t component) const {
  std::string out;
  print_node(*tree(component), impl_->variables, out);
  return out;
}

double ExprFunction::eval_component(std::size_t component, std::span<const double> p) const {
  impl_->check_arity(p);
  impl_->check_component(component);
  return impl_->run<double>(component, [&](std::size_t k) { return p[k]; });
}

Vector ExprFunction::eval(std::span<const double> p) const {
  impl_->check_arity(p);
  Vector out(num_components());
  for (std::size_t c = 0; c < num_components(); ++c) {
    out[c] = impl_->run<double>(c, [&](std::size_t k) { return p[k]; });
  }
  return out;
}

Dual ExprFunction::partial_component(std::size_t component, std::span<const double> p, std::size_t var) const {
  impl_->check_arity(p);
  impl_->check_component(component);
  impl_->check_var(var);
  return impl_->run<Dual>(component, [&](std::size_t k) { return Dual{p[k], k == var ? 1.0 : 0.0}; });
}

Vector ExprFunction::partial(std::span<const double> p, std::size_t var) const {
  impl_->check_arity(p);
  impl_->check_var(var);
  Vector out(num_components());
  for (std::size_t c = 0; c < num_components(); ++c) {
    out[c] = impl_->run<Dual>(c, [&](std::size_t k) { return Dual{p[k], k == var ? 1.0 : 0.0}; })
                 .derivative;
  }
  return out;
}

Vector ExprFunction::directional(std::span<const double> p, std::span<const double> direction) const {
  impl_->check_arity(p);
  impl_->check_arity(direction);
  Vector out(num_components());
  for (std::size_t c = 0; c < num_components(); ++c) {
    out[c] = impl_->run<Dual>(c, [&](std::size_t k) { return Dual{p[k], direction[k]}; }).derivative;
  }
  return out;
}

Matrix ExprFunction::jacobian(std::span<const double> p) const {
  Matrix jac(num_components(), num_variables());
  for (std::size_t j = 0; j < num_variables(); ++j) jac.set_column(j, partial(p, j).span());
  return jac;
}

// ---------------------------------------------------------------------------
// Batch evaluation

namespace {

constexpr std::size_t kChunk = 512;

}  // namespace

void PointBatch::set(std::size_t i, std::span<const double> point) {
  if (point.size() != dim_) throw DimensionMismatch("point dimension " + std::to_string(point.size()));
  for (std::size_t k = 0; k < dim_; ++k) data_[k * count_ + i] = point[k];
}

Vector PointBatch::point(std::size_t i) const {
  Vector p(dim_);
  for (std::size_t k = 0; k < dim_; ++k) p[k] = data_[k * count_ + i];
  return p;
}

void ExprFunction::eval_batch(std::size_t component, const PointBatch& points, std::span<double> out,
                              const simd::KernelTable* kernels) const {
  impl_->check_component(component);
  if (points.dim() != num_variables() || out.size() != points.count()) {
    throw DimensionMismatch("batch shape does not match function arity");
  }
  const auto& k = kernels ? *kernels : simd::active();
  const auto& code = impl_->programs[component].code;
  std::vector<double> slots(code.size() * kChunk);
  std::vector<std::uint8_t> bad(kChunk);

  for (std::size_t begin = 0; begin < points.count(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, points.count() - begin);
    std::fill(bad.begin(), bad.begin() + static_cast<std::ptrdiff_t>(n), 0);
    for (std::size_t i = 0; i < code.size(); ++i) {
      const Instr& in = code[i];
      double* r = slots.data() + i * kChunk;
      const double* a = slots.data() + in.a * kChunk;
      const double* b = slots.data() + in.b * kChunk;
      switch (in.op) {
        case Op::Constant: k.fill(in.constant, r, n); break;
        case Op::Variable: std::copy_n(points.column(in.var).data() + begin, n, r); break;
        case Op::Add: k.add(a, b, r, n); break;
        case Op::Sub: k.sub(a, b, r, n); break;
        case Op::Mul: k.mul(a, b, r, n); break;
        case Op::Div: k.div(a, b, r, n); break;
        case Op::Neg: k.neg(a, r, n); break;
        case Op::Sqrt: k.sqrt(a, r, n); break;
        default:
          for (std::size_t t = 0; t < n; ++t) r[t] = apply(in.op, a[t], b[t]);
          break;
      }
      if (in.op != Op::Constant && in.op != Op::Variable) k.flag_nonfinite(r, bad.data(), n);
    }
    const double* result = slots.data() + (code.size() - 1) * kChunk;
    for (std::size_t t = 0; t < n; ++t) out[begin + t] = bad[t] ? std::nan("") : result[t];
  }
}

void ExprFunction::partial_batch(std::size_t component, const PointBatch& points, std::size_t var,
                                 std::span<double> value, std::span<double> derivative,
                                 const simd::KernelTable* kernels) const {
  impl_->check_component(component);
  impl_->check_var(var);
  if (points.dim() != num_variables() || value.size() != points.count() ||
      derivative.size() != points.count()) {
    throw DimensionMismatch("batch shape does not match function arity");
  }
  const auto& k = kernels ? *kernels : simd::active();
  const auto& code = impl_->programs[component].code;
  std::vector<double> vals(code.size() * kChunk);
  std::vector<double> ders(code.size() * kChunk);
  std::vector<std::uint8_t> bad(kChunk);

  for (std::size_t begin = 0; begin < points.count(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, points.count() - begin);
    std::fill(bad.begin(), bad.begin() + static_cast<std::ptrdiff_t>(n), 0);
    for (std::size_t i = 0; i < code.size(); ++i) {
      const Instr& in = code[i];
      double* rv = vals.data() + i * kChunk;
      double* rd = ders.data() + i * kChunk;
      const double* av = vals.data() + in.a * kChunk;
      const double* ad = ders.data() + in.a * kChunk;
      const double* bv = vals.data() + in.b * kChunk;
      const double* bd = ders.data() + in.b * kChunk;
      switch (in.op) {
        case Op::Constant:
          k.fill(in.constant, rv, n);
          k.fill(0.0, rd, n);
          break;
        case Op::Variable:
          std::copy_n(points.column(in.var).data() + begin, n, rv);
          k.fill(in.var == var ? 1.0 : 0.0, rd, n);
          break;
        case Op::Add:
          k.add(av, bv, rv, n);
          k.add(ad, bd, rd, n);
          break;
        case Op::Sub:
          k.sub(av, bv, rv, n);
          k.sub(ad, bd, rd, n);
          break;
        case Op::Neg:
          k.neg(av, rv, n);
          k.neg(ad, rd, n);
          break;
        case Op::Mul: k.dual_mul(av, ad, bv, bd, rv, rd, n); break;
        case Op::Div: k.dual_div(av, ad, bv, bd, rv, rd, n); break;
        case Op::Sqrt:
          k.sqrt(av, rv, n);
          for (std::size_t t = 0; t < n; ++t) rd[t] = dual_rules::sqrt_derivative(rv[t], ad[t]);
          break;
        default:
          for (std::size_t t = 0; t < n; ++t) {
            const Dual r = apply(in.op, Dual{av[t], ad[t]}, Dual{bv[t], bd[t]});
            rv[t] = r.value;
            rd[t] = r.derivative;
          }
          break;
      }
      if (in.op != Op::Constant && in.op != Op::Variable) {
        k.flag_nonfinite(rv, bad.data(), n);
        k.flag_nonfinite(rd, bad.data(), n);
      }
    }
    const std::size_t last = (code.size() - 1) * kChunk;
    for (std::size_t t = 0; t < n; ++t) {
      value[begin + t] = bad[t] ? std::nan("") : vals[last + t];
      derivative[begin + t] = bad[t] ? std::nan("") : ders[last + t];
    }
  }
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

NodePtr rebuild(const NodePtr& n, const std::vector<NodePtr>& repl,
                std::unordered_map<const Node*, NodePtr>& memo) {
  if (const auto it = memo.find(n.get()); it != memo.end()) return it->second;
  NodePtr out;
  switch (n->op) {
    case Op::Constant: out = n; break;
    case Op::Variable: out = repl[n->var]; break;
    default:
      if (is_binary(n->op)) {
        out = Node::binary(n->op, rebuild(n->lhs, repl, memo), rebuild(n->rhs, repl, memo));
      } else {
        out = Node::unary(n->op, rebuild(n->lhs, repl, memo));
      }
  }
  memo.emplace(n.get(), out);
  return out;
}

}  // namespace

ExprFunction ExprFunction::substitute(const std::vector<NodePtr>& replacements,
                                      std::vector<std::string> new_variables) const {
  if (replacements.size() != num_variables()) {
    throw DimensionMismatch("substitution needs " + std::to_string(num_variables()) + " replacements, got " +
                            std::to_string(replacements.size()));
  }
  std::unordered_map<const Node*, NodePtr> memo;
  std::vector<NodePtr> trees;
  for (const auto& t : impl_->trees) trees.push_back(rebuild(t, replacements, memo));
  return from_trees(std::move(trees), std::move(new_variables));
}

std::vector<NodePtr> affine_replacements(std::span<const double> offset, const Matrix& a,
                                         std::span<const double> center) {
  if (offset.size() != a.rows() || center.size() != a.cols()) {
    throw DimensionMismatch("affine map shapes disagree");
  }
  std::vector<NodePtr> out;
  out.reserve(a.rows());
  for (std::size_t j = 0; j < a.rows(); ++j) {
    NodePtr sum;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double coef = a(j, k);
      if (coef == 0.0) continue;
      NodePtr diff = Node::variable(k);
      if (center[k] != 0.0) diff = Node::binary(Op::Sub, diff, Node::constant(center[k]));
      NodePtr term = coef == 1.0 ? diff : Node::binary(Op::Mul, Node::constant(coef), diff);
      sum = sum ? Node::binary(Op::Add, sum, term) : term;
    }
    if (!sum) {
      out.push_back(Node::constant(offset[j]));
    } else if (offset[j] != 0.0) {
      out.push_back(Node::binary(Op::Add, Node::constant(offset[j]), sum));
    } else {
      out.push_back(sum);
    }
  }
  return out;
}

std::pair<Matrix, Matrix> jacobian_split(const ExprFunction& f, const SplitPoint& p) {
  if (f.num_variables() != p.n() + p.m()) {
    throw DimensionMismatch("function has " + std::to_string(f.num_variables()) + " variables, split point has " +
                            std::to_string(p.n() + p.m()));
  }
  if (f.num_components() != p.m()) {
    throw DimensionMismatch("function has " + std::to_string(f.num_components()) +
                            " components but " + std::to_string(p.m()) + " dependent variables");
  }
  const Matrix jac = f.jacobian(p.joined());
  return {jac.columns(0, p.n()), jac.columns(p.n(), p.m())};
}

}  // namespace dini
