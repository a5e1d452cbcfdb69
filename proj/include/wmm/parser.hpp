#ifndef WMM_PARSER_HPP
#define WMM_PARSER_HPP

#include <stdexcept>
#include <string>

#include "wmm/ast.hpp"

namespace wmm {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
};

// Parses a full program.  Register names beginning with '_' are classified
// as generated (the transformation emits such names), everything else as
// source registers.  Throws ParseError on malformed input.
Program parse_program(const std::string& text);

// Reads the file and parses it; throws std::runtime_error if unreadable.
Program parse_file(const std::string& path);

}  // namespace wmm

#endif  // WMM_PARSER_HPP
