#pragma once

/// Small arithmetic-expression evaluator for user-supplied potentials and
/// density profiles. Grammar: + - * / ^ ( ), unary minus, decimal numbers,
/// the variables named at compile time, constants pi and e, and the functions
/// sin cos tan exp log sqrt abs tanh sinh cosh.

#include <memory>
#include <string>
#include <vector>

#include "hydrostab/errors.hpp"

namespace hydrostab {

class Expr {
  public:
    /// Compiles `text`; `variables` lists the permitted variable names in the
    /// order their values will be passed to eval. Throws ConfigurationError
    /// with position info on parse failure.
    static Expr compile(const std::string& text, const std::vector<std::string>& variables);

    double eval(const std::vector<double>& values) const;
    double eval(double x) const { return eval(std::vector<double>{x}); }
    double eval(double x, double y) const { return eval(std::vector<double>{x, y}); }

    const std::string& text() const { return text_; }

    Expr(const Expr&);
    Expr& operator=(const Expr&);
    Expr(Expr&&) noexcept;
    Expr& operator=(Expr&&) noexcept;
    ~Expr();

    struct Node;

  private:
    Expr();
    std::unique_ptr<Node> root_;
    std::string text_;
    std::size_t nvars_ = 0;
};

}  // namespace hydrostab
