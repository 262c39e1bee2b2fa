#include "semidiff/scalarization.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace semidiff {

Scalarization Scalarization::linear(Vec weights) {
    Scalarization s;
    s.kind = Kind::linear;
    s.weights = std::move(weights);
    s.validate();
    return s;
}

Scalarization Scalarization::chebyshev(double smoothing_temp) {
    Scalarization s;
    s.kind = Kind::chebyshev;
    s.smoothing_temp = smoothing_temp;
    s.validate();
    return s;
}

Scalarization Scalarization::lp(double p) {
    Scalarization s;
    s.kind = Kind::lp;
    s.p = p;
    s.validate();
    return s;
}

void Scalarization::validate() const {
    switch (kind) {
    case Kind::linear:
        if (weights.size() == 0 || (weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9)
            throw std::invalid_argument("scalarization: linear weights must lie on the simplex");
        break;
    case Kind::chebyshev:
        if (!(smoothing_temp >= 0.0)) throw std::invalid_argument("scalarization: smoothing_temp must be >= 0");
        break;
    case Kind::lp:
        if (!(p >= 1.0)) throw std::invalid_argument("scalarization: lp requires p >= 1");
        break;
    }
}

bool Scalarization::bounded_by_sup_norm(int k) const {
    if (kind == Kind::lp) return k == 1 || std::isinf(p);
    return true;
}

std::string to_string(Scalarization::Kind kind) {
    switch (kind) {
    case Scalarization::Kind::linear: return "linear";
    case Scalarization::Kind::chebyshev: return "chebyshev";
    case Scalarization::Kind::lp: return "lp";
    }
    return "?";
}

std::string Scalarization::id() const {
    std::ostringstream os;
    os << to_string(kind);
    if (kind == Kind::linear) {
        os << "(";
        for (Eigen::Index i = 0; i < weights.size(); ++i) os << (i ? ";" : "") << weights(i);
        os << ")";
    } else if (kind == Kind::lp) {
        os << "(p=" << p << ")";
    }
    return os.str();
}

double evaluate(const Scalarization& s, const Vec& u) {
    if (u.size() == 0) throw std::invalid_argument("scalarization: empty input");
    switch (s.kind) {
    case Scalarization::Kind::linear:
        if (u.size() != s.weights.size()) throw std::invalid_argument("scalarization: dimension mismatch");
        return s.weights.dot(u);
    case Scalarization::Kind::chebyshev: {
        const double m = u.maxCoeff();
        if (s.smoothing_temp == 0.0) return m;
        const double tau = s.smoothing_temp;
        return m + tau * std::log(((u.array() - m) / tau).exp().sum());
    }
    case Scalarization::Kind::lp:
        if (std::isinf(s.p)) return u.cwiseAbs().maxCoeff();
        return std::pow(u.cwiseAbs().array().pow(s.p).sum(), 1.0 / s.p);
    }
    return 0.0;
}

Vec subgradient(const Scalarization& s, const Vec& u) {
    const Eigen::Index k = u.size();
    switch (s.kind) {
    case Scalarization::Kind::linear:
        if (k != s.weights.size()) throw std::invalid_argument("scalarization: dimension mismatch");
        return s.weights;
    case Scalarization::Kind::chebyshev: {
        const double m = u.maxCoeff();
        if (s.smoothing_temp == 0.0) {
            Vec g = (u.array() == m).cast<double>().matrix();
            return g / g.sum();
        }
        Vec e = ((u.array() - m) / s.smoothing_temp).exp().matrix();
        return e / e.sum();
    }
    case Scalarization::Kind::lp: {
        const double norm = evaluate(s, u);
        if (norm == 0.0) return Vec::Zero(k);
        if (std::isinf(s.p)) {
            const double m = u.cwiseAbs().maxCoeff();
            Vec g = Vec::Zero(k);
            for (Eigen::Index i = 0; i < k; ++i)
                if (std::abs(u(i)) == m) g(i) = u(i) > 0 ? 1.0 : -1.0;
            return g / g.cwiseAbs().sum();
        }
        Vec g(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const double a = std::abs(u(i));
            g(i) = (u(i) > 0 ? 1.0 : (u(i) < 0 ? -1.0 : 0.0)) * std::pow(a / norm, s.p - 1.0);
        }
        return g;
    }
    }
    return Vec::Zero(k);
}

AxiomReport check_axioms(const ScalarFn& s, int k, std::size_t n_samples, Rng& rng,
                         bool check_square_property) {
    AxiomReport rep;
    rep.n_samples = n_samples;
    rep.square_property_checked = check_square_property;
    std::uniform_real_distribution<double> entry(-10.0, 10.0), scale(0.0, 10.0);
    auto draw = [&] {
        Vec u(k);
        for (int i = 0; i < k; ++i) u(i) = entry(rng);
        return u;
    };
    auto record = [&](const char* name, const Vec& u, const Vec& v, double a, double lhs, double rhs) {
        if (!rep.first_violation) rep.first_violation = AxiomViolation{name, u, v, a, lhs, rhs};
    };
    for (std::size_t n = 0; n < n_samples; ++n) {
        const Vec u = draw();
        const Vec v = draw();
        const double a = scale(rng);

        const double su = s(u);
        const double lhs_h = s(a * u);
        const double rhs_h = a * su;
        if (std::abs(lhs_h - rhs_h) > 1e-9 * (1.0 + std::abs(rhs_h))) {
            rep.homogeneity = false;
            record("positive_homogeneity", u, v, a, lhs_h, rhs_h);
        }

        const double lhs_t = std::abs(su - s(v));
        const double rhs_t = s((u - v).cwiseAbs());
        if (lhs_t > rhs_t + 1e-9 * (1.0 + std::abs(rhs_t))) {
            rep.reverse_triangle = false;
            record("reverse_triangle", u, v, a, lhs_t, rhs_t);
        }

        if (check_square_property) {
            const Vec w = u.cwiseAbs();
            const double lhs_s = s(w.cwiseProduct(w));
            const double sw = s(w);
            if (lhs_s < sw * sw - 1e-9 * (1.0 + sw * sw)) {
                rep.square_property = false;
                record("square_property", w, w, 0.0, lhs_s, sw * sw);
            }
        }
    }
    return rep;
}

AxiomReport check_axioms(const Scalarization& s, int k, std::size_t n_samples, Rng& rng) {
    if (s.smoothing_temp != 0.0) throw std::invalid_argument("check_axioms: requires the exact map (smoothing_temp = 0)");
    if (s.kind == Scalarization::Kind::linear && s.weights.size() != k)
        throw std::invalid_argument("check_axioms: dimension mismatch");
    return check_axioms([&s](const Vec& u) { return evaluate(s, u); }, k, n_samples, rng,
                        s.bounded_by_sup_norm(k));
}

}  // namespace semidiff
