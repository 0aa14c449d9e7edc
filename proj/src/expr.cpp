/*
 * Copyright 2026 The nhdyn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nhdyn/expr.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <system_error>

namespace nhdyn {

namespace detail {

void throw_domain(const char* what) { throw DomainError(what); }

}  // namespace detail

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_constant(double value) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::kConstant;
  node->value = value;
  return node;
}

NodePtr make_variable(VarKind var, int index) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::kVariable;
  node->var = var;
  node->index = index;
  return node;
}

NodePtr make_unary(UnaryOp op, NodePtr operand) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::kUnary;
  node->unary = op;
  node->lhs = std::move(operand);
  return node;
}

NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::kBinary;
  node->binary = op;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return node;
}

struct FunctionName {
  std::string_view name;
  UnaryOp op;
};

constexpr FunctionName kFunctions[] = {
    {"sin", UnaryOp::kSin},   {"cos", UnaryOp::kCos}, {"tan", UnaryOp::kTan},
    {"exp", UnaryOp::kExp},   {"log", UnaryOp::kLog}, {"sqrt", UnaryOp::kSqrt},
    {"abs", UnaryOp::kAbs},
};

class Parser {
 public:
  Parser(std::string_view src, int n) : src_(src), n_(n) {}

  NodePtr parse() {
    skip_space();
    if (at_end()) throw ParseError("empty expression", pos_);
    NodePtr node = parse_sum();
    skip_space();
    if (!at_end()) {
      throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    }
    return node;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (!at_end() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(BinaryOp::kAdd, lhs, parse_product());
      } else if (accept('-')) {
        lhs = make_binary(BinaryOp::kSub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(BinaryOp::kMul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_binary(BinaryOp::kDiv, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_unary(UnaryOp::kNeg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) {
      return make_binary(BinaryOp::kPow, base, parse_unary());
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (at_end()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      return parse_identifier();
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  void expect(char c) {
    skip_space();
    if (at_end()) {
      throw ParseError(std::string("expected '") + c + "', got end of input",
                       pos_);
    }
    if (src_[pos_] != c) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
    };
    digits();
    if (!at_end() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (!at_end() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (!at_end() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (at_end() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        pos_ = save;  // not an exponent, e.g. "2e" -> number then identifier
      } else {
        digits();
      }
    }
    double value = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw ParseError("malformed number", start);
    }
    return make_constant(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (!at_end() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    const std::string_view ident = src_.substr(start, pos_ - start);

    for (const auto& f : kFunctions) {
      if (ident == f.name) {
        expect('(');
        NodePtr arg = parse_sum();
        expect(')');
        return make_unary(f.op, arg);
      }
    }
    if (ident == "t") return make_variable(VarKind::kT, 0);
    if ((ident[0] == 'q' || ident[0] == 'v') && ident.size() > 1) {
      const std::string_view digits = ident.substr(1);
      int index = 0;
      const auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec == std::errc() && ptr == digits.data() + digits.size() &&
          digits[0] != '0') {
        if (index < 1 || index > n_) {
          throw ParseError("variable '" + std::string(ident) +
                               "' out of range for n = " + std::to_string(n_),
                           start);
        }
        return make_variable(ident[0] == 'q' ? VarKind::kQ : VarKind::kV,
                             index);
      }
      if (ec == std::errc() && ptr == digits.data() + digits.size()) {
        throw ParseError("variable '" + std::string(ident) +
                             "' out of range for n = " + std::to_string(n_),
                         start);
      }
    }
    throw ParseError("unknown identifier '" + std::string(ident) + "'", start);
  }

  std::string_view src_;
  int n_;
  std::size_t pos_{0};
};

std::string format_constant(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::kNeg: return "-";
    case UnaryOp::kSin: return "sin";
    case UnaryOp::kCos: return "cos";
    case UnaryOp::kTan: return "tan";
    case UnaryOp::kExp: return "exp";
    case UnaryOp::kLog: return "log";
    case UnaryOp::kSqrt: return "sqrt";
    case UnaryOp::kAbs: return "abs";
  }
  return "?";
}

char binary_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return '+';
    case BinaryOp::kSub: return '-';
    case BinaryOp::kMul: return '*';
    case BinaryOp::kDiv: return '/';
    case BinaryOp::kPow: return '^';
  }
  return '?';
}

void print(const ExprNode& node, std::string& out) {
  switch (node.kind) {
    case NodeKind::kConstant:
      out += format_constant(node.value);
      return;
    case NodeKind::kVariable:
      if (node.var == VarKind::kT) {
        out += 't';
      } else {
        out += node.var == VarKind::kQ ? 'q' : 'v';
        out += std::to_string(node.index);
      }
      return;
    case NodeKind::kUnary:
      if (node.unary == UnaryOp::kNeg) {
        out += "(-";
        print(*node.lhs, out);
        out += ')';
      } else {
        out += unary_name(node.unary);
        out += '(';
        print(*node.lhs, out);
        out += ')';
      }
      return;
    case NodeKind::kBinary:
      out += '(';
      print(*node.lhs, out);
      out += ' ';
      out += binary_symbol(node.binary);
      out += ' ';
      print(*node.rhs, out);
      out += ')';
      return;
  }
}

}  // namespace

Expr parse_expression(std::string_view source, int n) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  Parser parser(source, n);
  return Expr(parser.parse(), n);
}

std::string to_string(const Expr& expr) {
  std::string out;
  print(expr.root(), out);
  return out;
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::kConstant:
      return a.value == b.value;
    case NodeKind::kVariable:
      return a.var == b.var && a.index == b.index;
    case NodeKind::kUnary:
      return a.unary == b.unary && structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::kBinary:
      return a.binary == b.binary && structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
  }
  return false;
}

double eval(const Expr& expr, const EvalPoint& pt) {
  return eval<double>(expr, pt.q, pt.v, pt.t);
}

Gradient<double> grad(const Expr& expr, const EvalPoint& pt) {
  return gradient<double>(expr, pt.q, pt.v, pt.t);
}

}  // namespace nhdyn
