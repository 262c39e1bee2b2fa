#pragma once

#include "semidiff/rng.hpp"
#include "semidiff/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace semidiff {

struct Scalarization {
    enum class Kind { linear, chebyshev, lp };

    Kind kind = Kind::linear;
    Vec weights;                 // linear: point on the simplex
    double p = 2.0;              // lp only
    double smoothing_temp = 0.0; // chebyshev only; 0 = exact max

    static Scalarization linear(Vec weights);
    static Scalarization chebyshev(double smoothing_temp = 0.0);
    static Scalarization lp(double p);

    void validate() const;
    // Coordinatewise monotone on |u| and |S(u)| <= ||u||_inf.
    bool bounded_by_sup_norm(int k) const;
    std::string id() const;
};

std::string to_string(Scalarization::Kind kind);

double evaluate(const Scalarization& s, const Vec& u);
Vec subgradient(const Scalarization& s, const Vec& u);

using ScalarFn = std::function<double(const Vec&)>;

struct AxiomViolation {
    std::string axiom;
    Vec u;
    Vec v;
    double alpha = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct AxiomReport {
    std::size_t n_samples = 0;
    bool homogeneity = true;
    bool reverse_triangle = true;
    bool square_property_checked = false;
    bool square_property = true;  // S(u^2) >= S(u)^2 on u >= 0
    std::optional<AxiomViolation> first_violation;

    bool passed() const { return homogeneity && reverse_triangle && square_property; }
};

// Fuzzes positive homogeneity and the reverse triangle inequality on entries in
// [-10, 10] and alpha in [0, 10]; optionally S(u^2) >= S(u)^2 on u >= 0.
AxiomReport check_axioms(const ScalarFn& s, int k, std::size_t n_samples, Rng& rng,
                         bool check_square_property);
AxiomReport check_axioms(const Scalarization& s, int k, std::size_t n_samples, Rng& rng);

}  // namespace semidiff
