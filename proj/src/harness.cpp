#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "splitmix.hpp"

namespace hg::harness {

using nlohmann::json;

namespace {

const std::set<std::string> kAllChecks = {
    "identities", "symmetries",    "qcuc-audit", "conical", "constant-curvature",
    "eigen",      "kahler",        "half-q",     "homogeneity", "fd-audit"};
const std::set<std::string> kDirectMetricChecks = {"kahler", "fd-audit"};

const std::map<std::string, double> kDefaultTolerances = {
    {"identities", 1e-9}, {"symmetries", 1e-10},        {"qcuc-audit", 1e-9},
    {"conical", 1e-12},   {"constant-curvature", 1e-8}, {"eigen", 1e-9},
    {"kahler", 1e-12},    {"half-q", 1e-8},             {"homogeneity", 1e-10},
    {"fd-audit", 1e-5}};

int point_dim(const Scenario& sc) { return sc.kind == Kind::hessian ? sc.dim : 2 * sc.dim; }

std::string point_str(std::span<const double> p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", p[i]);
        s += buf;
    }
    return s + ")";
}

json vec_json(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

json mat_json(const tensor::SymMat& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json t3_json(const tensor::Tensor3& t) {
    json a = json::array();
    for (int i = 0; i < t.dim(); ++i) {
        json b = json::array();
        for (int j = 0; j < t.dim(); ++j) {
            json c = json::array();
            for (int k = 0; k < t.dim(); ++k) c.push_back(t(i, j, k));
            b.push_back(c);
        }
        a.push_back(b);
    }
    return a;
}

json t4_json(const tensor::Tensor4& t) {
    json a = json::array();
    for (int i = 0; i < t.dim(); ++i) {
        json b = json::array();
        for (int j = 0; j < t.dim(); ++j) {
            json c = json::array();
            for (int k = 0; k < t.dim(); ++k) {
                json d = json::array();
                for (int l = 0; l < t.dim(); ++l) d.push_back(t(i, j, k, l));
                c.push_back(d);
            }
            b.push_back(c);
        }
        a.push_back(b);
    }
    return a;
}

json tmat_json(std::span<const double> t, int m) {
    json rows = json::array();
    for (int i = 0; i < m; ++i) {
        json row = json::array();
        for (int j = 0; j < m; ++j) row.push_back(t[static_cast<std::size_t>(i * m + j)]);
        rows.push_back(row);
    }
    return rows;
}

json package_json(const hess::HessPackage& p) {
    json out;
    out["point"] = vec_json(p.point);
    out["g"] = mat_json(p.g);
    out["g_inv"] = mat_json(p.g_inv);
    out["c"] = t3_json(p.c);
    out["dc"] = t4_json(p.dc);
    out["gamma"] = t3_json(p.gamma);
    out["q"] = t4_json(p.q);
    out["qmix"] = t4_json(p.qmix);
    out["r"] = t4_json(p.r);
    out["g_pair"] = t4_json(p.gp);
    return out;
}

// Everything a scenario run needs, built once.
struct Ctx {
    const Scenario& sc;
    const Options& opt;
    Ctx(const Scenario& s, const Options& o) : sc(s), opt(o) {}
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> points;
    std::optional<expr::ScalarField> potential;
    std::optional<lag::LagrangianChart> chart;     // lagrange kind or hessian lift
    std::optional<lag::DirectMetricChart> dchart;
    std::vector<hess::HessPackage> pkgs;           // fiber packages for lagrange
    std::vector<std::string> yvars;
    std::vector<std::string> allvars;

    double tol(const std::string& check) const {
        auto it = sc.tolerances.find(check);
        const double base = it != sc.tolerances.end() ? it->second
                                                      : kDefaultTolerances.at(check);
        return base * opt.tolerance_scale;
    }

    void split_point(const std::vector<double>& pt, std::span<const double>& x,
                     std::span<const double>& y) const {
        const int m = sc.dim;
        if (sc.kind == Kind::hessian) {
            static const std::vector<double> zeros(6, 0.0);
            x = std::span<const double>{zeros.data(), static_cast<std::size_t>(m)};
            y = std::span<const double>{pt.data(), static_cast<std::size_t>(m)};
        } else {
            x = std::span<const double>{pt.data(), static_cast<std::size_t>(m)};
            y = std::span<const double>{pt.data() + m, static_cast<std::size_t>(m)};
        }
    }

    std::vector<double> eval_explicit_t(std::span<const double> x,
                                        std::span<const double> y) const;
    std::vector<expr::ScalarField> t_fields;
};

std::vector<double> Ctx::eval_explicit_t(std::span<const double> x,
                                         std::span<const double> y) const {
    std::vector<double> vals(x.begin(), x.end());
    vals.insert(vals.end(), y.begin(), y.end());
    std::vector<double> t;
    t.reserve(t_fields.size());
    for (const auto& f : t_fields) t.push_back(f.eval_plain(vals));
    return t;
}

bool needs_packages(const Scenario& sc) {
    for (const auto& c : sc.checks)
        if (c == "identities" || c == "symmetries" || c == "qcuc-audit" || c == "conical" ||
            c == "constant-curvature" || c == "eigen")
            return true;
    return false;
}

bool needs_chart(const Scenario& sc) {
    for (const auto& c : sc.checks)
        if (c == "half-q" || c == "homogeneity" || c == "kahler") return true;
    return sc.kind == Kind::lagrange;
}

void build_ctx(Ctx& ctx) {
    const Scenario& sc = ctx.sc;
    ctx.yvars = lag::coord_names("y", sc.dim);
    ctx.allvars = lag::coord_names("x", sc.dim);
    {
        auto yv = lag::coord_names("y", sc.dim);
        ctx.allvars.insert(ctx.allvars.end(), yv.begin(), yv.end());
    }
    switch (sc.kind) {
        case Kind::hessian:
            ctx.potential = expr::ScalarField::parse(sc.potential, ctx.yvars);
            if (needs_chart(sc)) ctx.chart = lag::LagrangianChart::make(sc.potential, sc.dim);
            break;
        case Kind::lagrange:
            ctx.chart = lag::LagrangianChart::make(sc.lagrangian, sc.dim);
            break;
        case Kind::direct_metric:
            ctx.dchart = lag::DirectMetricChart::make(sc.metric_components, sc.dim);
            break;
    }
    if (!sc.spray_connection) {
        for (const auto& s : sc.t_components)
            ctx.t_fields.push_back(expr::ScalarField::parse(s, ctx.allvars));
    }
    if (needs_packages(sc)) {
        for (const auto& pt : ctx.points) {
            std::span<const double> x, y;
            ctx.split_point(pt, x, y);
            try {
                if (sc.kind == Kind::hessian)
                    ctx.pkgs.push_back(
                        hess::build_package(jet::deriv_stack(*ctx.potential, ctx.yvars, y)));
                else
                    ctx.pkgs.push_back(lag::fiber_package(*ctx.chart, x, y));
            } catch (const SingularMetricError& e) {
                throw SingularMetricError(e.det,
                                          std::string(e.what()) + " at point " + point_str(pt));
            }
        }
    }
}

json make_check(const std::string& name, double max_residual, double tol, bool pass,
                json details) {
    json c;
    c["name"] = name;
    c["max_residual"] = max_residual;
    c["tolerance"] = tol;
    c["pass"] = pass;
    c["details"] = std::move(details);
    return c;
}

std::vector<std::string> intersect(std::vector<std::string> a,
                                   const std::vector<std::string>& b) {
    std::vector<std::string> out;
    for (auto& s : a)
        if (std::find(b.begin(), b.end(), s) != b.end()) out.push_back(std::move(s));
    return out;
}

json check_identities(Ctx& ctx) {
    const double tol = ctx.tol("identities");
    double relrq = 0, rsiq = 0, exprq = 0, phic = 0, tors = 0;
    double qmax = 0, qmixmax = 0, rmax = 0, cmax = 0;
    std::vector<std::string> perms_rq, perms_qg;
    bool first = true;
    for (const auto& p : ctx.pkgs) {
        const auto ids = hess::identity_suite(p);
        relrq = std::max(relrq, ids.relrq);
        rsiq = std::max(rsiq, ids.rsiqgotic);
        exprq = std::max(exprq, ids.exprqgotic);
        phic = std::max(phic, ids.phic);
        tors = std::max(tors, ids.torsion);
        qmax = std::max(qmax, ids.q_max);
        qmixmax = std::max(qmixmax, ids.qmix_max);
        rmax = std::max(rmax, ids.r_max);
        cmax = std::max(cmax, ids.c_max);
        const auto prq = hess::audit_permutations(p.r, p.q, 0.5, tol);
        const auto pqg = hess::audit_permutations(p.r, p.qmix, 1.0, tol);
        if (first) {
            perms_rq = prq;
            perms_qg = pqg;
            first = false;
        } else {
            perms_rq = intersect(std::move(perms_rq), prq);
            perms_qg = intersect(std::move(perms_qg), pqg);
        }
    }
    const double worst = std::max({relrq, rsiq, exprq, phic, tors});
    json d;
    d["relrq"] = relrq;
    d["rsiqgotic"] = rsiq;
    d["exprqgotic"] = exprq;
    d["phic"] = phic;
    d["torsion"] = tors;
    d["q_max_abs"] = qmax;
    d["qmix_max_abs"] = qmixmax;
    d["r_max_abs"] = rmax;
    d["c_max_abs"] = cmax;
    d["canonical_permutation"] = hess::kCanonicalPermutation;
    d["relrq_permutations"] = perms_rq;
    d["rsiqgotic_permutations"] = perms_qg;
    return make_check("identities", worst, tol, worst <= tol, std::move(d));
}

json check_symmetries(Ctx& ctx) {
    const double tol = ctx.tol("symmetries");
    double sq = 0, sqm = 0, ra = 0, rp = 0, rb = 0;
    for (const auto& p : ctx.pkgs) {
        const auto ids = hess::identity_suite(p);
        sq = std::max(sq, ids.sym_q);
        sqm = std::max(sqm, ids.sym_qmix);
        ra = std::max(ra, ids.r_antisym);
        rp = std::max(rp, ids.r_pair);
        rb = std::max(rb, ids.r_bianchi);
    }
    const double worst = std::max({sq, sqm, ra, rp, rb});
    json d;
    d["sym_q"] = sq;
    d["sym_qmix"] = sqm;
    d["riemann_antisym"] = ra;
    d["riemann_pair"] = rp;
    d["riemann_bianchi"] = rb;
    return make_check("symmetries", worst, tol, worst <= tol, std::move(d));
}

json check_qcuc(Ctx& ctx) {
    const double tol = ctx.tol("qcuc-audit");
    bool half_all = true, printed_all = true;
    double rh = 0, rp = 0;
    for (const auto& p : ctx.pkgs) {
        const auto audit = hess::qcuc_audit(p.dc, p.gamma, p.g, p.q, tol);
        rh = std::max(rh, audit.half_residual);
        rp = std::max(rp, audit.printed_residual);
        const bool hm = audit.match == hess::QcucAudit::Match::half_corrected ||
                        audit.match == hess::QcucAudit::Match::both;
        const bool pm = audit.match == hess::QcucAudit::Match::printed ||
                        audit.match == hess::QcucAudit::Match::both;
        half_all = half_all && hm;
        printed_all = printed_all && pm;
    }
    json d;
    d["half_corrected_max_residual"] = rh;
    d["printed_max_residual"] = rp;
    d["matched_variant"] = half_all && printed_all ? "both"
                           : half_all              ? "half_corrected"
                           : printed_all           ? "printed"
                                                   : "none";
    return make_check("qcuc-audit", rh, tol, half_all, std::move(d));
}

json check_conical(Ctx& ctx) {
    const double tol = ctx.tol("conical");
    const int m = ctx.sc.dim;
    // covariant cones: lowered basis generators plus three random symmetric cones
    std::vector<tensor::SymMat> raised_cones;
    for (int u = 0; u < m; ++u)
        for (int v = u; v < m; ++v) {
            tensor::SymMat tau(m);
            tau.set(u, v, 1.0);
            raised_cones.push_back(tau);
        }
    SplitMix64 rng(ctx.seed ^ 0xc0de5eedull);
    for (int r = 0; r < 3; ++r) {
        tensor::SymMat tau(m);
        for (int u = 0; u < m; ++u)
            for (int v = u; v < m; ++v) tau.set(u, v, rng.uniform(-1.0, 1.0));
        raised_cones.push_back(tau);
    }

    double inv_resid = 0.0, decomp_resid = 0.0;
    json kappa_first = json::array();
    for (const auto& p : ctx.pkgs) {
        // lower against g so the raised cone is the intended generator
        std::vector<tensor::SymMat> cones;
        for (const auto& tau : raised_cones) {
            tensor::SymMat nu(m);
            for (int a = 0; a < m; ++a)
                for (int b = a; b < m; ++b) {
                    double acc = 0.0;
                    for (int s = 0; s < m; ++s)
                        for (int t = 0; t < m; ++t) acc += p.g(a, s) * p.g(b, t) * tau(s, t);
                    nu.set(a, b, acc);
                }
            cones.push_back(nu);
        }
        bool first_cone = true;
        std::size_t ci = 0;
        for (const auto& nu : cones) {
            const double kappa = hess::conical_curvature(p, nu);
            if (first_cone) {
                kappa_first.push_back(kappa);
                first_cone = false;
            }
            for (double cscale : {-3.0, 0.5, 7.0}) {
                tensor::SymMat snu(m);
                for (int a = 0; a < m; ++a)
                    for (int b = a; b < m; ++b) snu.set(a, b, cscale * nu(a, b));
                const double k2 = hess::conical_curvature(p, snu);
                inv_resid = std::max(inv_resid, std::abs(k2 - kappa) / (1.0 + std::abs(kappa)));
            }
            // decomposable consistency against the direct entry ratio
            if (ci < static_cast<std::size_t>(m * (m + 1) / 2)) {
                const auto& tau = raised_cones[ci];
                int cu = -1, cv = -1;
                for (int u = 0; u < m && cu < 0; ++u)
                    for (int v = u; v < m; ++v)
                        if (tau(u, v) != 0.0) {
                            cu = u;
                            cv = v;
                            break;
                        }
                const double qn = p.q(cu, cv, cu, cv);
                const double gn = p.gp(cu, cv, cu, cv);
                if (gn != 0.0)
                    decomp_resid = std::max(
                        decomp_resid, std::abs(kappa - qn / gn) / (1.0 + std::abs(qn / gn)));
            }
            ++ci;
        }
    }
    const double worst = std::max(inv_resid, decomp_resid * 1e-3);  // decomp gate is looser
    json d;
    d["scale_invariance_residual"] = inv_resid;
    d["decomposable_residual"] = decomp_resid;
    d["kappa_first_cone"] = kappa_first;
    const bool pass = inv_resid <= tol && decomp_resid <= 1e-9 * ctx.opt.tolerance_scale;
    return make_check("conical", worst, tol, pass, std::move(d));
}

json check_constant_curvature(Ctx& ctx) {
    const double tol = ctx.tol("constant-curvature");
    const auto audit = hess::constant_curvature_audit(ctx.pkgs, ctx.seed);
    json d;
    d["proportional"] = audit.pointwise_proportional;
    d["constant"] = audit.constant;
    json f = json::array();
    for (double v : audit.f) f.push_back(v);
    d["f"] = f;
    d["proportionality_residual"] = audit.max_proportional_residual;
    d["f_spread"] = audit.max_f_spread;
    d["sectional_checked"] = audit.sectional_checked;
    d["sectional_max_diff"] = audit.sectional_max_diff;
    // informational: the verdict itself is scenario-dependent
    return make_check("constant-curvature", audit.max_proportional_residual, tol, true,
                      std::move(d));
}

json check_eigen(Ctx& ctx) {
    const double tol = ctx.tol("eigen");
    double resid = 0.0, ortho = 0.0;
    json tables = json::array();
    for (const auto& p : ctx.pkgs) {
        const auto qf = tensor::quad_form(p.q.symmetrized_checked(1e-10));
        const auto gf = tensor::quad_form(p.gp);
        const auto eig = tensor::gen_eig(qf, gf);
        const int M = qf.dim();
        json evs = json::array();
        for (double l : eig.eigenvalues) evs.push_back(l);
        tables.push_back(evs);
        const double qscale = std::max(1.0, qf.max_abs());
        std::vector<std::vector<double>> coords;
        for (const auto& v : eig.eigenvectors) coords.push_back(qf.coordinates(v));
        for (int e = 0; e < M; ++e) {
            for (int i = 0; i < M; ++i) {
                double qv = 0.0, gv = 0.0;
                for (int j = 0; j < M; ++j) {
                    qv += qf(i, j) * coords[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)];
                    gv += gf(i, j) * coords[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)];
                }
                resid = std::max(resid, std::abs(qv - eig.eigenvalues[static_cast<std::size_t>(e)] *
                                                          gv) /
                                            qscale);
            }
            for (int e2 = 0; e2 < M; ++e2) {
                double dot = 0.0;
                for (int i = 0; i < M; ++i)
                    for (int j = 0; j < M; ++j)
                        dot += coords[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)] *
                               gf(i, j) *
                               coords[static_cast<std::size_t>(e2)][static_cast<std::size_t>(j)];
                ortho = std::max(ortho, std::abs(dot - (e == e2 ? 1.0 : 0.0)));
            }
        }
    }
    const double worst = std::max(resid, ortho);
    json d;
    d["eigenvalues"] = tables;
    d["pair_residual"] = resid;
    d["orthonormality_residual"] = ortho;
    return make_check("eigen", worst, tol, worst <= tol, std::move(d));
}

json check_kahler(Ctx& ctx) {
    const double tol = ctx.tol("kahler");
    double defect = 0.0, equiv = 0.0;
    json per_point = json::array();
    for (const auto& pt : ctx.points) {
        std::span<const double> x, y;
        ctx.split_point(pt, x, y);
        double v = 0.0;
        if (ctx.sc.kind == Kind::direct_metric) {
            v = lag::kahler_closedness(*ctx.dchart, x, y);
            try {
                std::vector<std::vector<double>> one = {pt};
                const auto llt = lag::locally_lagrange_test(*ctx.dchart, one);
                equiv = std::max(equiv, std::abs(llt.max_defect - v));
            } catch (const SingularMetricError&) {
                // equivalence route needs an invertible metric; defect itself does not
            }
        } else {
            v = lag::kahler_closedness(*ctx.chart, x, y);
        }
        per_point.push_back(v);
        defect = std::max(defect, v);
    }
    json d;
    d["defect_per_point"] = per_point;
    d["locally_lagrange_equivalence_residual"] = equiv;
    return make_check("kahler", defect, tol, defect <= tol, std::move(d));
}

json check_half_q(Ctx& ctx) {
    const double tol = ctx.tol("half-q");
    double resid = 0.0, qmax = 0.0, leafmax = 0.0, jres = 0.0;
    for (const auto& pt : ctx.points) {
        std::span<const double> x, y;
        ctx.split_point(pt, x, y);
        const auto hq = lag::verify_half_Q(*ctx.chart, x, y);
        resid = std::max(resid, hq.residual);
        qmax = std::max(qmax, hq.q_max);
        leafmax = std::max(leafmax, hq.leaf_r_max);
        jres = std::max(jres, hq.j_symmetry_residual);
    }
    json d;
    d["residual"] = resid;
    d["q_max_abs"] = qmax;
    d["leaf_r_max_abs"] = leafmax;
    d["j_symmetry_residual"] = jres;
    d["slot_assignment"] = hess::kCanonicalPermutation;
    return make_check("half-q", resid, tol, resid <= tol, std::move(d));
}

json check_homogeneity(Ctx& ctx) {
    const double tol = ctx.tol("homogeneity");
    double euler = 0.0, lscale = 1.0;
    for (const auto& pt : ctx.points) {
        std::span<const double> x, y;
        ctx.split_point(pt, x, y);
        euler = std::max(euler, lag::euler_homogeneity(*ctx.chart, x, y));
        const auto st = lag::fiber_stack(*ctx.chart, x, y);
        lscale = std::max(lscale, std::abs(st.d0));
    }
    const bool two_homog = euler <= 1e-9 * lscale;
    json d;
    d["euler_defect_max"] = euler;
    d["two_homogeneous"] = two_homog;
    double scaling = 0.0;
    bool pass = true;
    if (two_homog) {
        for (const auto& pt : ctx.points) {
            std::span<const double> x, y;
            ctx.split_point(pt, x, y);
            std::vector<double> y2(y.begin(), y.end());
            for (auto& v : y2) v *= 2.0;
            std::vector<double> t1, t2;
            if (ctx.sc.spray_connection) {
                t1 = lag::cartan_nonlinear_connection(*ctx.chart, x, y);
                t2 = lag::cartan_nonlinear_connection(*ctx.chart, x, y2);
            } else {
                t1 = ctx.eval_explicit_t(x, y);
                t2 = ctx.eval_explicit_t(x, y2);
            }
            double diff = 0.0, tscale = 0.0;
            for (std::size_t i = 0; i < t1.size(); ++i) {
                diff = std::max(diff, std::abs(t2[i] - 2.0 * t1[i]));
                tscale = std::max(tscale, std::abs(2.0 * t1[i]));
            }
            scaling = std::max(scaling, diff == 0.0 ? 0.0 : diff / std::max(tscale, 1e-300));
        }
        d["t_scaling_residual"] = scaling;
        pass = scaling <= tol;
    } else {
        d["t_scaling_residual"] = nullptr;
    }
    return make_check("homogeneity", two_homog ? scaling : 0.0, tol, pass, std::move(d));
}

json check_fd_audit(Ctx& ctx) {
    const double tol_lo = ctx.tol("fd-audit");
    const double tol_hi = tol_lo * 100.0;  // order-4 gate
    struct Field {
        const expr::ScalarField* f;
        std::vector<std::string> active;
    };
    std::vector<Field> fields;
    if (ctx.sc.kind == Kind::hessian) {
        fields.push_back({&*ctx.potential, ctx.yvars});
    } else if (ctx.sc.kind == Kind::lagrange) {
        fields.push_back({&ctx.chart->L, ctx.allvars});
    } else {
        const int m = ctx.sc.dim;
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j)
                fields.push_back({&ctx.dchart->comps[static_cast<std::size_t>(i * m + j)],
                                  ctx.allvars});
    }

    double r_lo = 0.0, r_hi = 0.0;
    for (const auto& fld : fields) {
        const int n = static_cast<int>(fld.active.size());
        for (const auto& pt : ctx.points) {
            const std::span<const double> p{pt.data(), static_cast<std::size_t>(n)};
            const auto st = jet::deriv_stack(*fld.f, fld.active, p);
            // enumerate multi-indices of each total order
            std::vector<int> ord(static_cast<std::size_t>(n), 0);
            std::function<void(int, int, int)> walk = [&](int vi, int rem, int total) {
                if (vi == n - 1) {
                    ord[static_cast<std::size_t>(vi)] = rem;
                    // expand multi-index to an index tuple and read the stack
                    std::vector<int> idx;
                    for (int v = 0; v < n; ++v)
                        for (int r = 0; r < ord[static_cast<std::size_t>(v)]; ++r)
                            idx.push_back(v);
                    double jet_v = 0.0;
                    switch (total) {
                        case 1: jet_v = st.g1(idx[0]); break;
                        case 2: jet_v = st.g2(idx[0], idx[1]); break;
                        case 3: jet_v = st.g3(idx[0], idx[1], idx[2]); break;
                        default: jet_v = st.g4(idx[0], idx[1], idx[2], idx[3]); break;
                    }
                    std::vector<double> moved;
                    for (int v = 0; v < n; ++v)
                        if (ord[static_cast<std::size_t>(v)] > 0)
                            moved.push_back(p[static_cast<std::size_t>(v)]);
                    const double h = jet::fd_default_step(total, moved);
                    const double fd = jet::fd_probe(*fld.f, fld.active, p, ord, h);
                    const double rel = std::abs(jet_v - fd) / (1.0 + std::abs(jet_v));
                    if (total <= 3)
                        r_lo = std::max(r_lo, rel);
                    else
                        r_hi = std::max(r_hi, rel);
                    return;
                }
                for (int v = rem; v >= 0; --v) {
                    ord[static_cast<std::size_t>(vi)] = v;
                    walk(vi + 1, rem - v, total);
                }
            };
            for (int total = 1; total <= 4; ++total) walk(0, total, total);
        }
    }
    json d;
    d["order123_max_rel"] = r_lo;
    d["order4_max_rel"] = r_hi;
    const bool pass = r_lo <= tol_lo && r_hi <= tol_hi;
    return make_check("fd-audit", r_lo, tol_lo, pass, std::move(d));
}

json run_check(Ctx& ctx, const std::string& name) {
    if (name == "identities") return check_identities(ctx);
    if (name == "symmetries") return check_symmetries(ctx);
    if (name == "qcuc-audit") return check_qcuc(ctx);
    if (name == "conical") return check_conical(ctx);
    if (name == "constant-curvature") return check_constant_curvature(ctx);
    if (name == "eigen") return check_eigen(ctx);
    if (name == "kahler") return check_kahler(ctx);
    if (name == "half-q") return check_half_q(ctx);
    if (name == "homogeneity") return check_homogeneity(ctx);
    if (name == "fd-audit") return check_fd_audit(ctx);
    throw ValidationError("unknown check '" + name + "'");
}

}  // namespace

const BuiltinScenario* find_builtin(std::string_view name) {
    for (int i = 0; i < kBuiltinScenarioCount; ++i)
        if (name == kBuiltinScenarios[i].name) return &kBuiltinScenarios[i];
    return nullptr;
}

Options parse_options(const nlohmann::json& j) {
    Options opt;
    if (j.is_null()) return opt;
    if (!j.is_object()) throw ValidationError("options must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "seed") {
            if (!it.value().is_number_unsigned() && !it.value().is_number_integer())
                throw ValidationError("options.seed must be an integer");
            opt.seed = it.value().get<std::uint64_t>();
        } else if (it.key() == "tolerance_scale") {
            if (!it.value().is_number() || !(it.value().get<double>() > 0.0))
                throw ValidationError("options.tolerance_scale must be positive");
            opt.tolerance_scale = it.value().get<double>();
        } else if (it.key() == "dump_tensors") {
            if (!it.value().is_boolean())
                throw ValidationError("options.dump_tensors must be a boolean");
            opt.dump_tensors = it.value().get<bool>();
        } else {
            throw ValidationError("unknown option '" + it.key() + "'");
        }
    }
    return opt;
}

Scenario parse_scenario(const json& j) {
    if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
    static const std::set<std::string> known = {
        "name",   "kind",   "dim",        "potential",           "lagrangian",
        "metric_components", "samples",   "checks",              "tolerances",
        "nonlinear_connection", "expected_failures"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ValidationError("unknown scenario field '" + it.key() + "'");

    Scenario sc;
    sc.echo = j;
    sc.name = j.value("name", "scenario");

    if (!j.contains("kind") || !j["kind"].is_string())
        throw ValidationError("scenario.kind is required");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "hessian")
        sc.kind = Kind::hessian;
    else if (kind == "lagrange")
        sc.kind = Kind::lagrange;
    else if (kind == "direct-metric")
        sc.kind = Kind::direct_metric;
    else
        throw ValidationError("scenario.kind must be hessian, lagrange, or direct-metric");

    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw ValidationError("scenario.dim is required");
    sc.dim = j["dim"].get<int>();
    if (sc.dim < 1 || sc.dim > 6) throw ValidationError("scenario.dim must be in 1..6");

    const int pdim = point_dim(sc);

    if (sc.kind == Kind::hessian) {
        if (!j.contains("potential") || !j["potential"].is_string())
            throw ValidationError("hessian scenario needs a potential expression");
        sc.potential = j["potential"].get<std::string>();
        (void)expr::ScalarField::parse(sc.potential, lag::coord_names("y", sc.dim));
    } else if (sc.kind == Kind::lagrange) {
        if (!j.contains("lagrangian") || !j["lagrangian"].is_string())
            throw ValidationError("lagrange scenario needs a lagrangian expression");
        sc.lagrangian = j["lagrangian"].get<std::string>();
        (void)lag::LagrangianChart::make(sc.lagrangian, sc.dim);
    } else {
        if (!j.contains("metric_components") || !j["metric_components"].is_array())
            throw ValidationError("direct-metric scenario needs metric_components");
        const auto& rows = j["metric_components"];
        if (static_cast<int>(rows.size()) != sc.dim)
            throw ValidationError("metric_components must be an m x m array of expressions");
        for (const auto& row : rows) {
            if (!row.is_array() || static_cast<int>(row.size()) != sc.dim)
                throw ValidationError("metric_components must be an m x m array of expressions");
            for (const auto& e : row) {
                if (!e.is_string())
                    throw ValidationError("metric_components entries must be strings");
                sc.metric_components.push_back(e.get<std::string>());
            }
        }
        (void)lag::DirectMetricChart::make(sc.metric_components, sc.dim);
    }

    if (!j.contains("samples") || !j["samples"].is_object())
        throw ValidationError("scenario.samples is required");
    const auto& samples = j["samples"];
    if (samples.contains("points") == samples.contains("box"))
        throw ValidationError("samples needs exactly one of points or box");
    if (samples.contains("points")) {
        for (const auto& p : samples["points"]) {
            if (!p.is_array() || static_cast<int>(p.size()) != pdim)
                throw ValidationError("sample points must have " + std::to_string(pdim) +
                                      " coordinates");
            std::vector<double> pt;
            for (const auto& v : p) {
                if (!v.is_number()) throw ValidationError("sample coordinates must be numbers");
                pt.push_back(v.get<double>());
            }
            sc.samples.points.push_back(std::move(pt));
        }
        if (sc.samples.points.empty()) throw ValidationError("samples.points must be non-empty");
    } else {
        sc.samples.from_box = true;
        const auto& box = samples["box"];
        if (!box.is_object() || !box.contains("lo") || !box.contains("hi") ||
            !box.contains("count") || !box.contains("seed"))
            throw ValidationError("samples.box needs lo, hi, count, seed");
        for (const auto& v : box["lo"]) sc.samples.lo.push_back(v.get<double>());
        for (const auto& v : box["hi"]) sc.samples.hi.push_back(v.get<double>());
        if (static_cast<int>(sc.samples.lo.size()) != pdim ||
            static_cast<int>(sc.samples.hi.size()) != pdim)
            throw ValidationError("box lo/hi must have " + std::to_string(pdim) +
                                  " coordinates");
        for (int i = 0; i < pdim; ++i)
            if (!(sc.samples.lo[static_cast<std::size_t>(i)] <=
                  sc.samples.hi[static_cast<std::size_t>(i)]))
                throw ValidationError("box lo must not exceed hi");
        if (!box["count"].is_number_integer())
            throw ValidationError("box count must be an integer");
        sc.samples.count = box["count"].get<int>();
        if (sc.samples.count < 1 || sc.samples.count > 1000)
            throw ValidationError("box count must be in 1..1000");
        sc.samples.seed = box["seed"].get<std::uint64_t>();
    }

    if (!j.contains("checks") || !j["checks"].is_array() || j["checks"].empty())
        throw ValidationError("scenario.checks is required and must be non-empty");
    const auto& allowed = sc.kind == Kind::direct_metric ? kDirectMetricChecks : kAllChecks;
    for (const auto& c : j["checks"]) {
        if (!c.is_string()) throw ValidationError("check names must be strings");
        const std::string name = c.get<std::string>();
        if (!kAllChecks.count(name)) throw ValidationError("unknown check '" + name + "'");
        if (!allowed.count(name))
            throw ValidationError("check '" + name + "' is not available for this scenario kind");
        sc.checks.push_back(name);
    }

    if (j.contains("tolerances")) {
        if (!j["tolerances"].is_object())
            throw ValidationError("tolerances must map check names to numbers");
        for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it) {
            if (!kAllChecks.count(it.key()))
                throw ValidationError("tolerance override for unknown check '" + it.key() + "'");
            if (!it.value().is_number() || !(it.value().get<double>() > 0.0))
                throw ValidationError("tolerances must be positive numbers");
            sc.tolerances[it.key()] = it.value().get<double>();
        }
    }

    if (j.contains("nonlinear_connection")) {
        const auto& nc = j["nonlinear_connection"];
        if (nc.is_string()) {
            if (nc.get<std::string>() != "spray")
                throw ValidationError("nonlinear_connection must be \"spray\" or {\"t\": [[..]]}");
        } else if (nc.is_object() && nc.contains("t")) {
            sc.spray_connection = false;
            const auto& rows = nc["t"];
            if (!rows.is_array() || static_cast<int>(rows.size()) != sc.dim)
                throw ValidationError("nonlinear_connection.t must be an m x m expression array");
            auto vars = lag::coord_names("x", sc.dim);
            auto yv = lag::coord_names("y", sc.dim);
            vars.insert(vars.end(), yv.begin(), yv.end());
            for (const auto& row : rows) {
                if (!row.is_array() || static_cast<int>(row.size()) != sc.dim)
                    throw ValidationError(
                        "nonlinear_connection.t must be an m x m expression array");
                for (const auto& e : row) {
                    sc.t_components.push_back(e.get<std::string>());
                    (void)expr::ScalarField::parse(sc.t_components.back(), vars);
                }
            }
        } else {
            throw ValidationError("nonlinear_connection must be \"spray\" or {\"t\": [[..]]}");
        }
    }

    if (j.contains("expected_failures")) {
        for (const auto& c : j["expected_failures"]) {
            const std::string name = c.get<std::string>();
            if (std::find(sc.checks.begin(), sc.checks.end(), name) == sc.checks.end())
                throw ValidationError("expected_failures entry '" + name +
                                      "' is not a listed check");
            sc.expected_failures.push_back(name);
        }
    }
    return sc;
}

std::uint64_t effective_seed(const Scenario& sc, const Options& opt) {
    return opt.seed.value_or(sc.samples.seed);
}

std::vector<std::vector<double>> sample_points(const Scenario& sc, std::uint64_t seed) {
    if (!sc.samples.from_box) return sc.samples.points;
    std::vector<std::vector<double>> pts;
    SplitMix64 rng(seed);
    const std::size_t dim = sc.samples.lo.size();
    for (int i = 0; i < sc.samples.count; ++i) {
        std::vector<double> p(dim);
        for (std::size_t d = 0; d < dim; ++d)
            p[d] = rng.uniform(sc.samples.lo[d], sc.samples.hi[d]);
        pts.push_back(std::move(p));
    }
    return pts;
}

RunResult run_scenario(const Scenario& sc, const Options& opt) {
    Ctx ctx{sc, opt};
    ctx.seed = effective_seed(sc, opt);
    ctx.points = sample_points(sc, ctx.seed);
    build_ctx(ctx);

    json checks = json::array();
    bool all_ok = true;
    json perm_audit;
    for (const auto& name : sc.checks) {
        json c = run_check(ctx, name);
        const bool expected_fail = std::find(sc.expected_failures.begin(),
                                             sc.expected_failures.end(),
                                             name) != sc.expected_failures.end();
        const bool pass = c["pass"].get<bool>();
        if (pass == expected_fail) all_ok = false;
        if (name == "identities") {
            perm_audit["relrq"] = c["details"]["relrq_permutations"];
            perm_audit["rsiqgotic"] = c["details"]["rsiqgotic_permutations"];
            perm_audit["canonical"] = c["details"]["canonical_permutation"];
        }
        checks.push_back(std::move(c));
    }

    json report;
    report["name"] = sc.name;
    report["kind"] = sc.echo["kind"];
    report["dim"] = sc.dim;
    report["engine_version"] = kEngineVersion;
    report["seed"] = ctx.seed;
    json pts = json::array();
    for (const auto& p : ctx.points) pts.push_back(vec_json(p));
    report["points"] = pts;
    report["checks"] = checks;
    if (!perm_audit.is_null()) report["permutation_audit"] = perm_audit;
    report["scenario"] = sc.echo;
    report["overall_pass"] = all_ok;
    if (opt.dump_tensors && !ctx.pkgs.empty()) {
        json tensors = json::array();
        for (const auto& p : ctx.pkgs) tensors.push_back(package_json(p));
        report["tensors"] = tensors;
    }

    RunResult out;
    out.report = std::move(report);
    out.status = all_ok ? Status::ok : Status::check_failure;
    return out;
}

RunResult inspect_point(const Scenario& sc, std::span<const double> point, const Options& opt) {
    const int pdim = point_dim(sc);
    if (static_cast<int>(point.size()) != pdim)
        throw ValidationError("inspect point must have " + std::to_string(pdim) +
                              " coordinates");
    json report;
    report["name"] = sc.name;
    report["kind"] = sc.echo["kind"];
    report["dim"] = sc.dim;
    report["engine_version"] = kEngineVersion;
    report["point"] = vec_json(point);

    const int m = sc.dim;
    if (sc.kind == Kind::hessian) {
        const auto yvars = lag::coord_names("y", m);
        const auto f = expr::ScalarField::parse(sc.potential, yvars);
        const auto pkg = hess::build_package(jet::deriv_stack(f, yvars, point));
        report["package"] = package_json(pkg);
    } else if (sc.kind == Kind::lagrange) {
        const auto chart = lag::LagrangianChart::make(sc.lagrangian, m);
        const std::span<const double> x{point.data(), static_cast<std::size_t>(m)};
        const std::span<const double> y{point.data() + m, static_cast<std::size_t>(m)};
        auto p = lag::lag_package(chart, x, y);
        json pkg = package_json(p.fiber);
        pkg["x"] = vec_json(p.x);
        pkg["t"] = tmat_json(p.t, m);
        pkg["cartan_defect"] = p.cartan_defect;
        pkg["kahler_defect"] = p.kahler_defect;
        pkg["leaf_r"] = t4_json(p.leaf_r);
        pkg["euler_defect"] = p.euler_defect;
        report["package"] = pkg;
    } else {
        const auto chart = lag::DirectMetricChart::make(sc.metric_components, m);
        const std::span<const double> x{point.data(), static_cast<std::size_t>(m)};
        const std::span<const double> y{point.data() + m, static_cast<std::size_t>(m)};
        json pkg;
        tensor::SymMat g(m);
        std::vector<double> vals(point.begin(), point.end());
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j)
                g.set(i, j, chart.comps[static_cast<std::size_t>(i * m + j)].eval_plain(vals));
        pkg["g"] = mat_json(g);
        pkg["kahler_defect"] = lag::kahler_closedness(chart, x, y);
        report["package"] = pkg;
    }
    report["overall_pass"] = true;
    (void)opt;
    RunResult out;
    out.report = std::move(report);
    out.status = Status::ok;
    return out;
}

RunResult run_corpus(const Options& opt) {
    json combined;
    combined["engine_version"] = kEngineVersion;
    if (opt.seed)
        combined["seed_override"] = *opt.seed;
    else
        combined["seed_override"] = nullptr;
    json reports = json::array();
    bool all_ok = true;
    for (int i = 0; i < kBuiltinScenarioCount; ++i) {
        const Scenario sc = parse_scenario(json::parse(kBuiltinScenarios[i].json));
        RunResult r = run_scenario(sc, opt);
        all_ok = all_ok && r.status == Status::ok;
        reports.push_back(std::move(r.report));
    }
    combined["reports"] = reports;
    combined["overall_pass"] = all_ok;
    RunResult out;
    out.report = std::move(combined);
    out.status = all_ok ? Status::ok : Status::check_failure;
    return out;
}

}  // namespace hg::harness
