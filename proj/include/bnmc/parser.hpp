#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "bnmc/ast.hpp"

namespace bnmc {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                           std::to_string(col)),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Parses a model source text. Total: either returns a complete tree or
// throws ParseError. Unknown distribution families and wrong argument counts
// are rejected here.
ModelAst parse_model(std::string_view source);

}  // namespace bnmc
