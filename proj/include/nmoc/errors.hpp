#ifndef NMOC_ERRORS_HPP
#define NMOC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nmoc {

// Adaptive quadrature ran out of interval splits before reaching the
// requested tolerance; carries the tolerance that was actually achieved.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

// Non-finite values during time propagation.
class PropagationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; line is 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long line_number)
        : std::runtime_error(what + " (line " + std::to_string(line_number) + ")"),
          line(line_number) {}
    long line;
};

}  // namespace nmoc

#endif
