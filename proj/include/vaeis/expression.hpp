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

#ifndef VAEIS_EXPRESSION_HPP
#define VAEIS_EXPRESSION_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

/**
 * \file
 * \brief Arithmetic expressions over a point, for user-supplied log-targets.
 *
 * Grammar: numbers, the variables x0 .. x{d-1}, the constants pi and e, the binary
 * operators + - * / ^ (right associative), unary minus, parentheses and the functions
 * exp log sqrt abs sin cos tanh (one argument), min max pow logaddexp (two arguments).
 */

namespace vaeis::expression {

class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position) {}
  [[nodiscard]] std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

using Compiled = std::function<double(std::span<const double>)>;

/// Throws ParseError on bad syntax or a variable index >= dim.
Compiled compile(const std::string& text, std::size_t dim);

}  // namespace vaeis::expression

#endif
