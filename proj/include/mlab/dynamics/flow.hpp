#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "mlab/error.hpp"
#include "mlab/int128.hpp"
#include "mlab/phase/mod1.hpp"
#include "mlab/phase/poly_phase.hpp"
#include "mlab/rational.hpp"

namespace mlab::dynamics {

using phase::Mod1Ring;

/// A point of R/Z given either exactly (rational) or on the 2^-127 grid.
struct Angle {
    std::optional<Rational> exact;
    u128 fixed = 0;

    static Angle of(const Rational& r) { return Angle{r.frac(), 0}; }
    static Angle of_fixed(u128 r) { return Angle{std::nullopt, r & (phase::kFixedModulus - 1)}; }

    /// "p/q", an integer, "golden", "sqrt:k" or "fx:<hex>".
    static Angle parse(const nlohmann::json& j) {
        if (j.is_number_integer())
            return of(Rational(static_cast<i128>(j.get<std::int64_t>())));
        if (!j.is_string())
            throw ConfigError("angle must be a string or an integer: " + j.dump());
        std::string t = j.get<std::string>();
        if (t == "golden")
            return of_fixed(phase::fixed_golden());
        if (t.rfind("sqrt:", 0) == 0)
            return of_fixed(phase::fixed_sqrt_frac(static_cast<unsigned>(std::stoul(t.substr(5)))));
        if (t.rfind("fx:", 0) == 0)
            return of_fixed(phase::parse_phase("fx:" + t.substr(3)).residues().at(0));
        try {
            return of(parse_rational(t));
        } catch (const Error&) {
            throw ConfigError("bad angle literal '" + t + "'");
        }
    }

    std::string str() const {
        if (exact)
            return exact->str();
        std::string hex;
        u128 v = fixed;
        do {
            hex.insert(hex.begin(), "0123456789abcdef"[static_cast<int>(v & 15)]);
            v >>= 4;
        } while (v != 0);
        return "fx:" + hex;
    }

    u128 residue(const Mod1Ring& ring) const {
        if (exact)
            return ring.from_rational(*exact);
        if (!ring.fixed())
            throw ConsistencyError("fixed-point angle in a rational ring");
        return fixed;
    }
};

using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// x -> A x + b (column vectors).
struct AffineFlow {
    IntMatrix A;
    std::vector<Angle> b;
    std::size_t dim() const { return A.size(); }
};

/// psi(x) = c x + psi1(x), psi1 piecewise linear on nodes[0..K] over [0, 1].
struct PsiSpec {
    std::int64_t c = 0;
    std::vector<double> nodes{0.0, 0.0};

    static constexpr std::size_t kDefaultNodes = std::size_t{1} << 16;

    template <class F>
    static PsiSpec tabulate(std::int64_t c, F&& psi1, std::size_t K = kDefaultNodes) {
        PsiSpec p;
        p.c = c;
        p.nodes.resize(K + 1);
        for (std::size_t i = 0; i < K; ++i)
            p.nodes[i] = psi1(static_cast<double>(i) / static_cast<double>(K));
        p.nodes[K] = p.nodes[0];
        return p;
    }

    void validate() const {
        if (nodes.size() < 2)
            throw ConfigError("psi1 needs at least two nodes");
        if (nodes.front() != nodes.back())
            throw ConfigError("psi1 must be 1-periodic: first and last node values differ");
    }

    bool zero() const {
        for (double v : nodes)
            if (v != 0.0)
                return false;
        return true;
    }

    double spacing() const { return 1.0 / static_cast<double>(nodes.size() - 1); }

    /// Lipschitz constant of the interpolant.
    double lipschitz() const {
        double L = 0;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            L = std::max(L, std::abs(nodes[i + 1] - nodes[i]));
        return L / spacing();
    }

    double max_abs() const {
        double m = 0;
        for (double v : nodes)
            m = std::max(m, std::abs(v));
        return m;
    }

    double eval1(double x) const {
        std::size_t K = nodes.size() - 1;
        double pos = x * static_cast<double>(K);
        auto i = static_cast<std::size_t>(pos);
        if (i >= K)
            i = K - 1;
        double f = pos - static_cast<double>(i);
        return nodes[i] + (nodes[i + 1] - nodes[i]) * f;
    }

    /// Bound on the rounding of one psi1 evaluation onto the 2^-127 grid.
    double eval_slack() const { return 1e-15 * (1.0 + max_abs()); }
};

/// (x, y) -> (x + alpha, y + psi(x)).
struct SkewProduct {
    Angle alpha;
    PsiSpec psi;
    std::size_t dim() const { return 2; }
};

using Component = std::variant<AffineFlow, SkewProduct>;

inline std::size_t dim_of(const Component& c) {
    return std::visit([](const auto& f) { return f.dim(); }, c);
}

/// F : T^m -> C. character: e(<b, z>); table: phi(<b, z>) with phi piecewise
/// linear and real; constant; product: left(z_left) * right(z_right).
struct Observable {
    std::string kind = "constant";
    std::vector<std::int64_t> b;
    std::vector<double> table;
    std::complex<double> value{1.0, 0.0};
    std::size_t split = 0;
    std::shared_ptr<Observable> left, right;

    static Observable constant(std::complex<double> v) {
        Observable o;
        o.value = v;
        return o;
    }
    static Observable character(std::vector<std::int64_t> b) {
        Observable o;
        o.kind = "character";
        o.b = std::move(b);
        return o;
    }
    static Observable lipschitz_table(std::vector<std::int64_t> b, std::vector<double> table) {
        Observable o;
        o.kind = "table";
        o.b = std::move(b);
        o.table = std::move(table);
        return o;
    }
    static Observable product(Observable l, Observable r, std::size_t split) {
        Observable o;
        o.kind = "product";
        o.split = split;
        o.left = std::make_shared<Observable>(std::move(l));
        o.right = std::make_shared<Observable>(std::move(r));
        return o;
    }

    /// Number of coordinates the observable reads (0 for constants).
    std::size_t arity() const {
        if (kind == "product")
            return split + right->arity();
        if (kind == "constant")
            return 0;
        return b.size();
    }
};

inline u128 pairing(const Mod1Ring& ring, const std::vector<std::int64_t>& b, const u128* z) {
    u128 r = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i] != 0)
            r = ring.add(r, ring.mul(ring.from_int(b[i]), z[i]));
    return r;
}

inline std::complex<double> evaluate(const Observable& o, const Mod1Ring& ring, const u128* z) {
    if (o.kind == "constant")
        return o.value;
    if (o.kind == "product")
        return evaluate(*o.left, ring, z) * evaluate(*o.right, ring, z + o.split);
    double u = ring.to_double(pairing(ring, o.b, z));
    if (o.kind == "character") {
        double th = 2.0 * std::numbers::pi * u;
        return {std::cos(th), std::sin(th)};
    }
    std::size_t K = o.table.size() - 1;
    double pos = u * static_cast<double>(K);
    auto i = std::min(static_cast<std::size_t>(pos), K - 1);
    double f = pos - static_cast<double>(i);
    return {o.table[i] + (o.table[i + 1] - o.table[i]) * f, 0.0};
}

// ---------------------------------------------------------------- JSON

inline Observable observable_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        auto v = j.value("value", nlohmann::json(1.0));
        if (v.is_array())
            return Observable::constant({v.at(0).get<double>(), v.at(1).get<double>()});
        return Observable::constant({v.get<double>(), 0.0});
    }
    if (kind == "character")
        return Observable::character(j.at("b").get<std::vector<std::int64_t>>());
    if (kind == "table") {
        auto t = j.at("table").get<std::vector<double>>();
        if (t.size() < 2 || t.front() != t.back())
            throw ConfigError("observable table needs >= 2 nodes with equal endpoints");
        return Observable::lipschitz_table(j.at("b").get<std::vector<std::int64_t>>(), std::move(t));
    }
    if (kind == "product")
        return Observable::product(observable_from_json(j.at("left")), observable_from_json(j.at("right")), j.at("split").get<std::size_t>());
    throw ConfigError("unknown observable kind '" + kind + "'");
}

inline nlohmann::json to_json_value(const Observable& o) {
    if (o.kind == "constant")
        return {{"kind", "constant"}, {"value", {o.value.real(), o.value.imag()}}};
    if (o.kind == "character")
        return {{"kind", "character"}, {"b", o.b}};
    if (o.kind == "table")
        return {{"kind", "table"}, {"b", o.b}, {"table", o.table}};
    return {{"kind", "product"}, {"split", o.split}, {"left", to_json_value(*o.left)}, {"right", to_json_value(*o.right)}};
}

struct FlowSpec {
    std::vector<Component> components;
    std::optional<Observable> observable;

    std::size_t dim() const {
        std::size_t d = 0;
        for (const auto& c : components)
            d += dim_of(c);
        return d;
    }

    static FlowSpec rotation(const Angle& alpha) { return FlowSpec{{AffineFlow{{{1}}, {alpha}}}, std::nullopt}; }
    static FlowSpec affine(IntMatrix A, std::vector<Angle> b) { return FlowSpec{{AffineFlow{std::move(A), std::move(b)}}, std::nullopt}; }
    static FlowSpec skew(const Angle& alpha, PsiSpec psi) { return FlowSpec{{SkewProduct{alpha, std::move(psi)}}, std::nullopt}; }
    static FlowSpec product(const FlowSpec& l, const FlowSpec& r) {
        FlowSpec p;
        p.components = l.components;
        p.components.insert(p.components.end(), r.components.begin(), r.components.end());
        return p;
    }
};

namespace detail {

inline void component_from_json(const nlohmann::json& j, std::vector<Component>& out) {
    std::string type = j.at("type").get<std::string>();
    if (type == "rotation") {
        out.emplace_back(AffineFlow{{{1}}, {Angle::parse(j.at("alpha"))}});
    } else if (type == "affine") {
        IntMatrix A;
        for (const auto& row : j.at("A")) {
            std::vector<std::int64_t> r;
            for (const auto& e : row) {
                if (!e.is_number_integer())
                    throw ArgumentError("affine matrix entries must be integers: " + e.dump());
                r.push_back(e.get<std::int64_t>());
            }
            A.push_back(std::move(r));
        }
        std::vector<Angle> b;
        if (j.contains("b"))
            for (const auto& e : j.at("b"))
                b.push_back(Angle::parse(e));
        else
            b.assign(A.size(), Angle::of(Rational(0)));
        out.emplace_back(AffineFlow{std::move(A), std::move(b)});
    } else if (type == "skew") {
        PsiSpec psi;
        if (j.contains("psi")) {
            psi.c = j.at("psi").value("c", std::int64_t{0});
            if (j.at("psi").contains("nodes"))
                psi.nodes = j.at("psi").at("nodes").get<std::vector<double>>();
        }
        out.emplace_back(SkewProduct{Angle::parse(j.at("alpha")), std::move(psi)});
    } else if (type == "product") {
        component_from_json(j.at("left"), out);
        component_from_json(j.at("right"), out);
    } else {
        throw ConfigError("unknown flow type '" + type + "'");
    }
}

} // namespace detail

inline FlowSpec flow_from_json(const nlohmann::json& j) {
    FlowSpec f;
    detail::component_from_json(j, f.components);
    if (j.contains("observable"))
        f.observable = observable_from_json(j.at("observable"));
    return f;
}

inline nlohmann::json component_to_json(const Component& c) {
    if (const auto* a = std::get_if<AffineFlow>(&c)) {
        std::vector<std::string> b;
        for (const auto& x : a->b)
            b.push_back(x.str());
        return {{"type", "affine"}, {"A", a->A}, {"b", b}};
    }
    const auto& s = std::get<SkewProduct>(c);
    return {{"type", "skew"}, {"alpha", s.alpha.str()}, {"psi", {{"c", s.psi.c}, {"nodes", s.psi.nodes}}}};
}

inline nlohmann::json flow_to_json(const FlowSpec& f) {
    nlohmann::json j;
    if (f.components.size() == 1) {
        j = component_to_json(f.components[0]);
    } else {
        // right-nested products
        j = component_to_json(f.components.back());
        for (std::size_t i = f.components.size() - 1; i-- > 0;)
            j = {{"type", "product"}, {"left", component_to_json(f.components[i])}, {"right", j}};
    }
    if (f.observable)
        j["observable"] = to_json_value(*f.observable);
    return j;
}

// ---------------------------------------------------------------- entropy

inline i128 det_bareiss(std::vector<std::vector<i128>> M) {
    std::size_t n = M.size();
    i128 sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (M[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && M[p][k] == 0)
                ++p;
            if (p == n)
                return 0;
            std::swap(M[p], M[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                M[i][j] = checked_sub(checked_mul(M[i][j], M[k][k]), checked_mul(M[i][k], M[k][j])) / prev;
        prev = M[k][k];
    }
    return sign * M[n - 1][n - 1];
}

/// Characteristic polynomial det(xI - A), coefficients low to high, via
/// Faddeev-LeVerrier in exact integers.
inline std::vector<i128> charpoly(const IntMatrix& A) {
    std::size_t n = A.size();
    std::vector<std::vector<i128>> M(n, std::vector<i128>(n, 0)), AM(n, std::vector<i128>(n));
    std::vector<i128> c(n + 1, 0);
    c[n] = 1;
    for (std::size_t k = 1; k <= n; ++k) {
        // M_k = A M_{k-1} + c_{n-k+1} I
        for (std::size_t i = 0; i < n; ++i)
            M[i][i] = checked_add(M[i][i], c[n - k + 1]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                i128 s = 0;
                for (std::size_t l = 0; l < n; ++l)
                    s = checked_add(s, checked_mul(A[i][l], M[l][j]));
                AM[i][j] = s;
            }
        i128 tr = 0;
        for (std::size_t i = 0; i < n; ++i)
            tr = checked_add(tr, AM[i][i]);
        c[n - k] = -tr / static_cast<i128>(k);
        M = AM;
    }
    return c;
}

/// Exact test: the monic integer polynomial is a product of cyclotomic
/// polynomials (equivalently, all roots are roots of unity).
inline bool is_cyclotomic_product(std::vector<i128> p) {
    auto trim = [](std::vector<i128>& v) {
        while (v.size() > 1 && v.back() == 0)
            v.pop_back();
    };
    auto divide = [&](std::vector<i128>& num, const std::vector<i128>& den) -> bool {
        if (num.size() < den.size())
            return false;
        std::vector<i128> r = num, q(num.size() - den.size() + 1, 0);
        for (std::size_t i = q.size(); i-- > 0;) {
            q[i] = r[i + den.size() - 1]; // den is monic
            for (std::size_t j = 0; j < den.size(); ++j)
                r[i + j] = checked_sub(r[i + j], checked_mul(q[i], den[j]));
        }
        for (auto x : r)
            if (x != 0)
                return false;
        num = q;
        trim(num);
        return true;
    };
    std::size_t deg = p.size() - 1;
    std::vector<std::vector<i128>> phi(1);
    for (std::size_t k = 1; p.size() > 1; ++k) {
        // Phi_k = (x^k - 1) / prod_{d | k, d < k} Phi_d
        std::vector<i128> xk(k + 1, 0);
        xk[0] = -1;
        xk[k] = 1;
        for (std::size_t d = 1; d < k; ++d)
            if (k % d == 0)
                divide(xk, phi[d]);
        phi.push_back(xk);
        if (xk.size() - 1 <= deg)
            while (p.size() > 1 && divide(p, xk)) {
            }
        if (k > 4 * deg * deg + 2)
            break;
    }
    return p.size() == 1 && (p[0] == 1 || p[0] == -1);
}

struct EntropyVerdict {
    bool zero_entropy = false;
    double max_abs = 0;
    double tolerance = 1e-9;
    std::vector<std::complex<double>> spectrum;
    std::vector<i128> charpoly;
    std::optional<bool> exact;
};

inline void to_json(nlohmann::json& j, const EntropyVerdict& v) {
    std::vector<std::array<double, 2>> spec;
    for (auto z : v.spectrum)
        spec.push_back({z.real(), z.imag()});
    std::vector<std::string> cp;
    for (auto c : v.charpoly)
        cp.push_back(mlab::to_string(c));
    j = {{"zero_entropy", v.zero_entropy}, {"max_abs_eigenvalue", v.max_abs}, {"tolerance", v.tolerance}, {"spectrum", spec}, {"charpoly", cp}};
    if (v.exact)
        j["exact_cyclotomic"] = *v.exact;
}

inline void require_automorphism(const IntMatrix& A) {
    std::size_t n = A.size();
    if (n == 0)
        throw ArgumentError("empty matrix");
    std::vector<std::vector<i128>> M(n, std::vector<i128>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (A[i].size() != n)
            throw ArgumentError("matrix must be square");
        for (std::size_t j = 0; j < n; ++j)
            M[i][j] = A[i][j];
    }
    i128 d = det_bareiss(M);
    if (d != 1 && d != -1)
        throw ArgumentError("matrix is not unimodular (det = " + mlab::to_string(d) + ")");
}

inline EntropyVerdict zero_entropy_check(const IntMatrix& A, bool exact = false, double tol = 1e-9) {
    require_automorphism(A);
    std::size_t n = A.size();
    if (n > 8)
        throw ArgumentError("entropy check supports dimension <= 8");
    Eigen::MatrixXd M(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(A[i][j]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    EntropyVerdict v;
    v.tolerance = tol;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        v.spectrum.push_back(es.eigenvalues()[i]);
        v.max_abs = std::max(v.max_abs, std::abs(es.eigenvalues()[i]));
    }
    v.zero_entropy = v.max_abs <= 1.0 + tol;
    v.charpoly = charpoly(A);
    if (exact)
        v.exact = is_cyclotomic_product(v.charpoly);
    return v;
}

// ---------------------------------------------------------------- system

/// A flow with its coordinate ring fixed and an initial point.
class System {
  public:
    using State = std::vector<u128>;

    System(FlowSpec spec, const std::vector<Angle>& x0) : spec_(std::move(spec)) {
        if (x0.size() != spec_.dim())
            throw ArgumentError("initial point has " + std::to_string(x0.size()) + " coordinates, flow has " + std::to_string(spec_.dim()));
        for (const auto& c : spec_.components) {
            if (const auto* a = std::get_if<AffineFlow>(&c)) {
                if (a->dim() > 16)
                    throw ArgumentError("affine components are limited to dimension 16");
                require_automorphism(a->A);
                if (a->b.size() != a->A.size())
                    throw ArgumentError("translation vector size does not match the matrix");
            } else {
                std::get<SkewProduct>(c).psi.validate();
            }
        }
        if (spec_.observable && spec_.observable->arity() > spec_.dim())
            throw ArgumentError("observable reads more coordinates than the flow has");
        ring_ = choose_ring(x0);
        x0_.reserve(x0.size());
        for (const auto& a : x0)
            x0_.push_back(a.residue(ring_));
        for (const auto& c : spec_.components) {
            if (const auto* a = std::get_if<AffineFlow>(&c)) {
                std::vector<u128> b;
                for (const auto& x : a->b)
                    b.push_back(x.residue(ring_));
                b_.push_back(std::move(b));
            } else {
                b_.push_back({std::get<SkewProduct>(c).alpha.residue(ring_)});
            }
        }
    }

    const FlowSpec& spec() const { return spec_; }
    const Mod1Ring& ring() const { return ring_; }
    const State& initial() const { return x0_; }
    std::size_t dim() const { return x0_.size(); }

    /// Applies T once.
    void step(State& z) const {
        std::size_t off = 0;
        for (std::size_t k = 0; k < spec_.components.size(); ++k) {
            const auto& c = spec_.components[k];
            if (const auto* a = std::get_if<AffineFlow>(&c)) {
                std::size_t m = a->dim();
                u128 tmp[16];
                for (std::size_t i = 0; i < m; ++i) {
                    u128 s = b_[k][i];
                    for (std::size_t j = 0; j < m; ++j)
                        if (a->A[i][j] != 0)
                            s = ring_.add(s, ring_.mul(ring_.from_int(a->A[i][j]), z[off + j]));
                    tmp[i] = s;
                }
                for (std::size_t i = 0; i < m; ++i)
                    z[off + i] = tmp[i];
                off += m;
            } else {
                const auto& s = std::get<SkewProduct>(c);
                u128 x = z[off];
                u128 dy = ring_.mul(ring_.from_int(s.psi.c), x);
                if (!s.psi.zero())
                    dy = ring_.add(dy, psi1_residue(s.psi, x));
                z[off + 1] = ring_.add(z[off + 1], dy);
                z[off] = ring_.add(x, b_[k][0]);
                off += 2;
            }
        }
    }

    /// T^n z: closed form for affine components, stepping for skew components.
    State jump(State z, std::uint64_t n) const {
        std::size_t off = 0;
        for (std::size_t k = 0; k < spec_.components.size(); ++k) {
            const auto& c = spec_.components[k];
            if (const auto* a = std::get_if<AffineFlow>(&c)) {
                affine_power(*a, b_[k], z, off, n);
                off += a->dim();
            } else {
                System sub(FlowSpec{{c}, std::nullopt}, ring_, b_[k]);
                State w{z[off], z[off + 1]};
                for (std::uint64_t i = 0; i < n; ++i)
                    sub.step(w);
                z[off] = w[0];
                z[off + 1] = w[1];
                off += 2;
            }
        }
        return z;
    }

    /// psi1(x) rounded onto the 2^-127 grid (only used in FIXED127 rings).
    u128 psi1_residue(const PsiSpec& psi, u128 x) const {
        double v = psi.eval1(ring_.to_double(x));
        double f = v - std::floor(v);
        if (f >= 1.0)
            f = 0.0;
        auto top = static_cast<std::uint64_t>(std::ldexp(f, 64));
        return static_cast<u128>(top) << 63;
    }

    std::complex<double> observe(const Observable& o, const State& z) const { return evaluate(o, ring_, z.data()); }

  private:
    System(FlowSpec spec, const Mod1Ring& ring, std::vector<u128> b) : spec_(std::move(spec)), ring_(ring), b_{std::move(b)} {}

    Mod1Ring choose_ring(const std::vector<Angle>& x0) const {
        bool fixed = false;
        i128 den = 1;
        auto take = [&](const Angle& a) {
            if (!a.exact) {
                fixed = true;
                return;
            }
            if (!fixed) {
                i128 l = lcm128(den, a.exact->den());
                if (static_cast<u128>(l) > phase::kMaxRationalDenominator)
                    fixed = true;
                else
                    den = l;
            }
        };
        for (const auto& a : x0)
            take(a);
        for (const auto& c : spec_.components) {
            if (const auto* a = std::get_if<AffineFlow>(&c)) {
                for (const auto& x : a->b)
                    take(x);
            } else {
                const auto& s = std::get<SkewProduct>(c);
                take(s.alpha);
                if (!s.psi.zero())
                    fixed = true;
            }
        }
        return Mod1Ring(fixed ? phase::kFixedModulus : static_cast<u128>(den));
    }

    // Affine map (M, v): z -> M z + v with M integer entries reduced in the ring.
    void affine_power(const AffineFlow& a, const std::vector<u128>& b, State& z, std::size_t off, std::uint64_t n) const {
        std::size_t m = a.dim();
        using Mat = std::vector<std::vector<u128>>;
        auto compose = [&](const Mat& M1, const std::vector<u128>& v1, const Mat& M2, const std::vector<u128>& v2) {
            // (M1, v1) o (M2, v2) = (M1 M2, M1 v2 + v1)
            Mat M(m, std::vector<u128>(m, 0));
            std::vector<u128> v(m);
            for (std::size_t i = 0; i < m; ++i) {
                u128 s = v1[i];
                for (std::size_t l = 0; l < m; ++l) {
                    s = ring_.add(s, ring_.mul(M1[i][l], v2[l]));
                    for (std::size_t j = 0; j < m; ++j)
                        M[i][j] = ring_.add(M[i][j], ring_.mul(M1[i][l], M2[l][j]));
                }
                v[i] = s;
            }
            return std::make_pair(M, v);
        };
        Mat base(m, std::vector<u128>(m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                base[i][j] = ring_.from_int(a.A[i][j]);
        Mat R(m, std::vector<u128>(m, 0));
        for (std::size_t i = 0; i < m; ++i)
            R[i][i] = ring_.from_int(1);
        std::vector<u128> rv(m, 0), bv = b;
        while (n > 0) {
            if (n & 1)
                std::tie(R, rv) = compose(base, bv, R, rv);
            std::tie(base, bv) = compose(base, bv, base, bv);
            n >>= 1;
        }
        std::vector<u128> out(m);
        for (std::size_t i = 0; i < m; ++i) {
            u128 s = rv[i];
            for (std::size_t j = 0; j < m; ++j)
                s = ring_.add(s, ring_.mul(R[i][j], z[off + j]));
            out[i] = s;
        }
        for (std::size_t i = 0; i < m; ++i)
            z[off + i] = out[i];
    }

    FlowSpec spec_;
    Mod1Ring ring_;
    State x0_;
    std::vector<std::vector<u128>> b_;
};

/// Streams T^n x0 for n = 0, 1, 2, ...
class OrbitCursor {
  public:
    OrbitCursor(const System& sys, System::State start, std::uint64_t index = 0) : sys_(sys), z_(std::move(start)), n_(index) {}
    explicit OrbitCursor(const System& sys) : OrbitCursor(sys, sys.initial()) {}

    const System::State& state() const { return z_; }
    std::uint64_t index() const { return n_; }
    void step() {
        sys_.step(z_);
        ++n_;
    }

  private:
    const System& sys_;
    System::State z_;
    std::uint64_t n_;
};

/// T^0 x0, ..., T^{N-1} x0.
inline std::vector<System::State> orbit(const System& sys, std::uint64_t N) {
    std::vector<System::State> out;
    out.reserve(N);
    OrbitCursor cur(sys);
    for (std::uint64_t n = 0; n < N; ++n, cur.step())
        out.push_back(cur.state());
    return out;
}

} // namespace mlab::dynamics
