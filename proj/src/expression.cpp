// Copyright 2026 The vaeis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <vaeis/expression.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <vector>

namespace vaeis::expression {
namespace {

class Parser {
 public:
  Parser(const std::string& text, std::size_t dim) : text_(text), dim_(dim) {}

  Compiled parse() {
    Compiled e = sum();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
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
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Compiled sum() {
    Compiled lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = [a = lhs, b = product()](std::span<const double> x) { return a(x) + b(x); };
      } else if (accept('-')) {
        lhs = [a = lhs, b = product()](std::span<const double> x) { return a(x) - b(x); };
      } else {
        return lhs;
      }
    }
  }

  Compiled product() {
    Compiled lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = [a = lhs, b = unary()](std::span<const double> x) { return a(x) * b(x); };
      } else if (accept('/')) {
        lhs = [a = lhs, b = unary()](std::span<const double> x) { return a(x) / b(x); };
      } else {
        return lhs;
      }
    }
  }

  Compiled unary() {
    if (accept('-')) {
      return [a = unary()](std::span<const double> x) { return -a(x); };
    }
    if (accept('+')) {
      return unary();
    }
    return power();
  }

  Compiled power() {
    Compiled base = primary();
    if (accept('^')) {
      return [a = base, b = unary()](std::span<const double> x) { return std::pow(a(x), b(x)); };
    }
    return base;
  }

  Compiled primary() {
    skip_space();
    if (pos_ >= text_.size()) {
      throw ParseError("unexpected end of expression", pos_);
    }
    if (accept('(')) {
      Compiled e = sum();
      expect(')');
      return e;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      if (end == begin) {
        throw ParseError("bad number", pos_);
      }
      pos_ += static_cast<std::size_t>(end - begin);
      return [value](std::span<const double>) { return value; };
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return identifier();
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  Compiled identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name = text_.substr(start, pos_ - start);
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      std::vector<Compiled> args{sum()};
      while (accept(',')) args.push_back(sum());
      expect(')');
      return call(name, std::move(args), start);
    }
    if (name == "pi") return [](std::span<const double>) { return std::numbers::pi; };
    if (name == "e") return [](std::span<const double>) { return std::numbers::e; };
    if (name.size() > 1 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const std::size_t index = std::stoul(name.substr(1));
      if (index >= dim_) {
        throw ParseError("variable " + name + " out of range for dimension " + std::to_string(dim_), start);
      }
      return [index](std::span<const double> x) { return x[index]; };
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  static Compiled call(const std::string& name, std::vector<Compiled> args, std::size_t at) {
    using Unary = double (*)(double);
    static const std::vector<std::pair<std::string, Unary>> unary_fns{
        {"exp", [](double v) { return std::exp(v); }},   {"log", [](double v) { return std::log(v); }},
        {"sqrt", [](double v) { return std::sqrt(v); }}, {"abs", [](double v) { return std::abs(v); }},
        {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
        {"tanh", [](double v) { return std::tanh(v); }}};
    for (const auto& [fn_name, fn] : unary_fns) {
      if (fn_name == name) {
        if (args.size() != 1) throw ParseError(name + " takes one argument", at);
        return [fn, a = args[0]](std::span<const double> x) { return fn(a(x)); };
      }
    }
    using Binary = double (*)(double, double);
    static const std::vector<std::pair<std::string, Binary>> binary_fns{
        {"min", [](double a, double b) { return std::min(a, b); }},
        {"max", [](double a, double b) { return std::max(a, b); }},
        {"pow", [](double a, double b) { return std::pow(a, b); }},
        {"logaddexp", [](double a, double b) {
           const double m = std::max(a, b);
           if (m == -std::numeric_limits<double>::infinity()) return m;
           return m + std::log(std::exp(a - m) + std::exp(b - m));
         }}};
    for (const auto& [fn_name, fn] : binary_fns) {
      if (fn_name == name) {
        if (args.size() != 2) throw ParseError(name + " takes two arguments", at);
        return [fn, a = args[0], b = args[1]](std::span<const double> x) { return fn(a(x), b(x)); };
      }
    }
    throw ParseError("unknown function '" + name + "'", at);
  }

  const std::string& text_;
  std::size_t dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Compiled compile(const std::string& text, std::size_t dim) { return Parser(text, dim).parse(); }

}  // namespace vaeis::expression
