#include "jet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace hg::jet {

namespace {

std::uint64_t pack_key(std::span<const std::uint8_t> e, int n) {
    std::uint64_t k = 0;
    for (int i = 0; i < n; ++i) k |= static_cast<std::uint64_t>(e[i]) << (5 * i);
    return k;
}

double fact(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

const JetSpace& JetSpace::of(int nvars) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<JetSpace>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[nvars];
    if (!slot) slot = build(nvars);
    return *slot;
}

std::unique_ptr<JetSpace> JetSpace::build(int nvars) {
    if (nvars < 1 || nvars > kMaxVars)
        throw ValidationError("jet dimension out of range: " + std::to_string(nvars));
    auto sp = std::unique_ptr<JetSpace>(new JetSpace());
    sp->nvars_ = nvars;

    std::array<std::uint8_t, kMaxVars> cur{};
    std::function<void(int, int)> emit = [&](int pos, int rem) {
        if (pos == nvars - 1) {
            cur[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(rem);
            sp->expo_.push_back(cur);
            return;
        }
        for (int v = rem; v >= 0; --v) {
            cur[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(v);
            emit(pos + 1, rem - v);
        }
    };
    for (int d = 0; d <= kMaxOrder; ++d) emit(0, d);

    const int n = static_cast<int>(sp->expo_.size());
    sp->degree_.resize(static_cast<std::size_t>(n));
    sp->factorial_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int deg = 0;
        double f = 1.0;
        for (int v = 0; v < nvars; ++v) {
            deg += sp->expo_[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)];
            f *= fact(sp->expo_[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)]);
        }
        sp->degree_[static_cast<std::size_t>(i)] = deg;
        sp->factorial_[static_cast<std::size_t>(i)] = f;
        sp->lookup_.emplace(pack_key({sp->expo_[static_cast<std::size_t>(i)].data(),
                                      static_cast<std::size_t>(nvars)},
                                     nvars),
                            i);
    }

    // degree-1 monomials must directly follow the constant for Jet::variable
    for (int v = 0; v < nvars; ++v) {
        std::array<std::uint8_t, kMaxVars> e{};
        e[static_cast<std::size_t>(v)] = 1;
        const int idx = sp->lookup_.at(pack_key({e.data(), static_cast<std::size_t>(nvars)}, nvars));
        if (idx != 1 + v) throw Error(Status::internal, "jet monomial ordering broken");
    }

    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (sp->degree_[static_cast<std::size_t>(a)] +
                    sp->degree_[static_cast<std::size_t>(b)] >
                kMaxOrder)
                continue;
            std::array<std::uint8_t, kMaxVars> e{};
            for (int v = 0; v < nvars; ++v)
                e[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(
                    sp->expo_[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)] +
                    sp->expo_[static_cast<std::size_t>(b)][static_cast<std::size_t>(v)]);
            const int c =
                sp->lookup_.at(pack_key({e.data(), static_cast<std::size_t>(nvars)}, nvars));
            sp->prod_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                                 static_cast<std::uint32_t>(c)});
        }
    }
    return sp;
}

int JetSpace::index_of(std::span<const std::uint8_t> e) const {
    int deg = 0;
    for (int i = 0; i < nvars_; ++i) deg += e[static_cast<std::size_t>(i)];
    if (deg > kMaxOrder) return -1;
    return lookup_.at(pack_key(e, nvars_));
}

Jet operator-(const Jet& x) {
    Jet r = x;
    for (auto& v : r.c_) v = -v;
    return r;
}

Jet operator+(const Jet& a, const Jet& b) {
    Jet r = a;
    for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += b.c_[i];
    return r;
}

Jet operator-(const Jet& a, const Jet& b) {
    Jet r = a;
    for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] -= b.c_[i];
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet r(*a.sp_);
    for (const auto& p : a.sp_->products()) r.c_[p.c] += a.c_[p.a] * b.c_[p.b];
    return r;
}

// f(u) = sum_k f^(k)(u0)/k! * (u - u0)^k, truncated. The constant slot is
// exactly d[0] since every power of w = u - u0 has a zero constant term.
Jet compose(const Jet& u, const std::array<double, 5>& d) {
    Jet w = u;
    w.c_[0] = 0.0;
    const Jet w2 = w * w;
    const Jet w3 = w2 * w;
    const Jet w4 = w3 * w;
    Jet r = Jet::constant(*u.sp_, d[0]);
    for (std::size_t i = 0; i < r.c_.size(); ++i)
        r.c_[i] += d[1] * w.c_[i] + (d[2] / 2.0) * w2.c_[i] + (d[3] / 6.0) * w3.c_[i] +
                   (d[4] / 24.0) * w4.c_[i];
    return r;
}

Jet operator/(const Jet& a, const Jet& b) {
    const double u = b.value();
    const double u2 = u * u;
    Jet r = a * compose(b, {1.0 / u, -1.0 / u2, 2.0 / (u2 * u), -6.0 / (u2 * u2),
                            24.0 / (u2 * u2 * u)});
    r.c_[0] = a.value() / u;  // keep the value slot identical to plain division
    return r;
}

Jet log(const Jet& x) {
    const double u = x.value();
    const double u2 = u * u;
    return compose(x, {std::log(u), 1.0 / u, -1.0 / u2, 2.0 / (u2 * u), -6.0 / (u2 * u2)});
}

Jet exp(const Jet& x) {
    const double e = std::exp(x.value());
    return compose(x, {e, e, e, e, e});
}

Jet sqrt(const Jet& x) {
    const double u = x.value();
    const double r = std::sqrt(u);
    return compose(x, {r, 0.5 / r, -0.25 / (r * u), 0.375 / (r * u * u),
                       -0.9375 / (r * u * u * u)});
}

Jet sin(const Jet& x) {
    const double s = std::sin(x.value());
    const double c = std::cos(x.value());
    return compose(x, {s, c, -s, -c, s});
}

Jet cos(const Jet& x) {
    const double s = std::sin(x.value());
    const double c = std::cos(x.value());
    return compose(x, {c, -s, -c, s, c});
}

Jet tanh(const Jet& x) {
    const double t = std::tanh(x.value());
    const double s = 1.0 - t * t;
    return compose(x, {t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0),
                       s * (16.0 * t - 24.0 * t * t * t)});
}

namespace {

int find_name(std::span<const std::string> names, const std::string& n) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == n) return static_cast<int>(i);
    return -1;
}

// Per-field-variable values: active coordinate, fixed constant, or unused.
template <class T, class MakeActive, class MakeConst>
std::vector<T> build_slots(const expr::ScalarField& f, std::span<const std::string> active,
                           std::span<const Binding> fixed, MakeActive&& make_active,
                           MakeConst&& make_const) {
    const auto& vars = f.vars();
    std::vector<T> slots;
    slots.reserve(vars.size());
    for (std::size_t s = 0; s < vars.size(); ++s) {
        const int ai = find_name(active, vars[s]);
        if (ai >= 0) {
            slots.push_back(make_active(ai));
            continue;
        }
        bool found = false;
        for (const auto& [name, value] : fixed) {
            if (name == vars[s]) {
                slots.push_back(make_const(value));
                found = true;
                break;
            }
        }
        if (!found) {
            if (f.used()[s])
                throw ValidationError("unbound variable '" + vars[s] + "'");
            slots.push_back(make_const(0.0));
        }
    }
    return slots;
}

}  // namespace

DerivStack deriv_stack(const expr::ScalarField& f, std::span<const std::string> active_vars,
                       std::span<const double> point, std::span<const Binding> fixed) {
    const int n = static_cast<int>(active_vars.size());
    if (static_cast<int>(point.size()) != n)
        throw ValidationError("point dimension does not match the active variable list");
    const JetSpace& sp = JetSpace::of(n);

    auto slots = build_slots<Jet>(
        f, active_vars, fixed,
        [&](int ai) { return Jet::variable(sp, ai, point[static_cast<std::size_t>(ai)]); },
        [&](double v) { return Jet::constant(sp, v); });
    const Jet r = f.eval<Jet>(slots, [&](double v) { return Jet::constant(sp, v); });

    DerivStack out;
    out.dim = n;
    out.point.assign(point.begin(), point.end());
    out.d0 = r.value();
    out.d1.resize(static_cast<std::size_t>(n));
    out.d2.resize(static_cast<std::size_t>(n) * n);
    out.d3.resize(static_cast<std::size_t>(n) * n * n);
    out.d4.resize(static_cast<std::size_t>(n) * n * n * n);

    const auto c = r.coeffs();
    std::array<std::uint8_t, kMaxVars> e{};
    auto coef = [&](std::span<const std::uint8_t> ex) {
        const int idx = sp.index_of(ex);
        return c[static_cast<std::size_t>(idx)] * sp.factorial(idx);
    };
    const std::span<const std::uint8_t> ev{e.data(), static_cast<std::size_t>(n)};
    for (int i = 0; i < n; ++i) {
        e.fill(0);
        e[static_cast<std::size_t>(i)] += 1;
        out.d1[static_cast<std::size_t>(i)] = coef(ev);
        for (int j = 0; j < n; ++j) {
            e[static_cast<std::size_t>(j)] += 1;
            out.d2[static_cast<std::size_t>(i * n + j)] = coef(ev);
            for (int k = 0; k < n; ++k) {
                e[static_cast<std::size_t>(k)] += 1;
                out.d3[static_cast<std::size_t>((i * n + j) * n + k)] = coef(ev);
                for (int l = 0; l < n; ++l) {
                    e[static_cast<std::size_t>(l)] += 1;
                    out.d4[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)] = coef(ev);
                    e[static_cast<std::size_t>(l)] -= 1;
                }
                e[static_cast<std::size_t>(k)] -= 1;
            }
            e[static_cast<std::size_t>(j)] -= 1;
        }
    }
    return out;
}

double fd_probe(const expr::ScalarField& f, std::span<const std::string> active_vars,
                std::span<const double> point, std::span<const int> orders, double step,
                std::span<const Binding> fixed) {
    const int n = static_cast<int>(active_vars.size());
    if (static_cast<int>(orders.size()) != n)
        throw ValidationError("orders list does not match the active variable list");
    int total = 0;
    for (int o : orders) total += o;
    if (total < 1 || total > kMaxOrder)
        throw ValidationError("fd_probe supports derivative orders 1..4");
    if (!(step > 0.0)) throw ValidationError("fd_probe step must be positive");

    std::vector<double> p(point.begin(), point.end());
    std::vector<int> ord(orders.begin(), orders.end());

    std::function<double(int)> rec = [&](int vi) -> double {
        while (vi < n && ord[static_cast<std::size_t>(vi)] == 0) ++vi;
        if (vi == n) {
            auto slots = build_slots<double>(
                f, active_vars, fixed, [&](int ai) { return p[static_cast<std::size_t>(ai)]; },
                [&](double v) { return v; });
            return f.eval_plain(slots);
        }
        const int k = ord[static_cast<std::size_t>(vi)];
        ord[static_cast<std::size_t>(vi)] = 0;
        auto F = [&](double delta) {
            const double old = p[static_cast<std::size_t>(vi)];
            p[static_cast<std::size_t>(vi)] = old + delta;
            const double v = rec(vi + 1);
            p[static_cast<std::size_t>(vi)] = old;
            return v;
        };
        const double h = step;
        double v = 0.0;
        switch (k) {
            case 1: v = (F(h) - F(-h)) / (2.0 * h); break;
            case 2: v = (F(h) - 2.0 * F(0.0) + F(-h)) / (h * h); break;
            case 3: v = (F(2.0 * h) - 2.0 * F(h) + 2.0 * F(-h) - F(-2.0 * h)) / (2.0 * h * h * h);
                break;
            case 4:
                v = (F(2.0 * h) - 4.0 * F(h) + 6.0 * F(0.0) - 4.0 * F(-h) + F(-2.0 * h)) /
                    (h * h * h * h);
                break;
            default:
                throw ValidationError("per-variable derivative order must be 0..4");
        }
        ord[static_cast<std::size_t>(vi)] = k;
        return v;
    };
    return rec(0);
}

double fd_default_step(int order, std::span<const double> diff_coords) {
    // Scale with the smallest coordinate the stencil moves (clamped at 1):
    // barrier-type fields shrink their length scale near the domain edge.
    double scale = 1.0;
    bool first = true;
    for (double c : diff_coords) {
        scale = first ? std::max(1.0, std::abs(c)) : std::min(scale, std::max(1.0, std::abs(c)));
        first = false;
    }
    // Higher orders need larger steps: the cancellation noise of a k-th
    // difference grows like eps/h^k, while truncation grows like h^2.
    switch (order) {
        case 1:
        case 2: return 1e-4 * scale;
        case 3: return 5e-4 * scale;
        default: return 5e-3 * scale;
    }
}

}  // namespace hg::jet
