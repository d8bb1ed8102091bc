#include "critcon/shadingeq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <ostream>

#include "critcon/parallel.hpp"

namespace critcon {

namespace {

constexpr std::array<const char*, 7> kEqNames{"1", "2", "3", "4", "5a", "5b", "5c"};

Vec2 turn(const Vec2& a) { return {-a.y(), a.x()}; }

EquationResidual make_residual(const Vec2& p, EqId eq, double lhs, std::initializer_list<double> terms,
                               double scale = 0) {
    EquationResidual r;
    r.point = p;
    r.eq = eq;
    r.lhs = lhs;
    double floor = std::max(kResidualFloor, scale);
    for (double t : terms) {
        r.rhs += t;
        floor = std::max(floor, std::abs(t));
    }
    r.abs_residual = std::abs(lhs - r.rhs);
    r.rel_residual = r.abs_residual / std::max({std::abs(lhs), std::abs(r.rhs), floor});
    return r;
}

// Shared state of one evaluation: surface jet, image derivatives, frame.
struct Context {
    SurfaceDerivs d;
    ImageLocal img;
    Vec3 normal;
    double w = 1;
    double det_h = 0;
    double hinv_norm = 0;
};

Context prepare(const AnalyticSurface& s, const Vec3& light, const Vec2& p, const ShadingOptions& opt) {
    if (std::abs(light.norm() - 1) > 1e-9) throw ParameterError("light must be unit length");
    if (!(opt.albedo > 0)) throw ParameterError("albedo must be positive");
    Context c;
    c.d = s.eval(p);
    c.w = std::sqrt(1 + c.d.grad.squaredNorm());
    c.normal = Vec3(-c.d.grad.x(), -c.d.grad.y(), 1) / c.w;
    if (!(light.dot(c.normal) > 0)) throw DomainError("point is shadowed (L . n <= 0)");
    c.det_h = c.d.hess.determinant();
    const Eigen::SelfAdjointEigenSolver<Mat2> es(c.d.hess, Eigen::EigenvaluesOnly);
    const double smallest = es.eigenvalues().cwiseAbs().minCoeff();
    c.hinv_norm = smallest > 0 ? 1 / smallest : std::numeric_limits<double>::infinity();
    c.img = opt.path == DerivPath::Analytic ? image_local_analytic(s, light, p, opt.albedo)
                                            : image_local_fd(s, light, p, opt.fd_step, opt.albedo);
    return c;
}

void require_conditioned(const AnalyticSurface& s, const Context& c, const ShadingOptions& opt) {
    const double delta = opt.delta_h >= 0 ? opt.delta_h : default_delta_h(s);
    if (!(std::abs(c.det_h) > delta)) throw ConditioningError("|det H| <= delta_h: Hessian is near singular");
    if (!(c.img.grad.norm() > opt.epsilon_grad)) throw DomainError("|grad I| <= epsilon_grad: frame undefined");
}

void stamp(EquationResidual& r, const Context& c) {
    r.det_h = c.det_h;
    r.hinv_norm = c.hinv_norm;
}

}  // namespace

std::string to_string(EqId id) { return kEqNames[static_cast<std::size_t>(id)]; }

EqId eq_id_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kEqNames.size(); ++i)
        if (s == kEqNames[i]) return static_cast<EqId>(i);
    throw ParameterError("unknown equation id: " + s);
}

double default_delta_h(const AnalyticSurface& s) {
    const Domain& dom = s.domain();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const int n = 33;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double h = s.height({dom.x0 + (dom.x1 - dom.x0) * i / (n - 1), dom.y0 + (dom.y1 - dom.y0) * j / (n - 1)});
            lo = std::min(lo, h);
            hi = std::max(hi, h);
        }
    const double extent = dom.x1 - dom.x0;
    const double scale = (hi > lo ? hi - lo : 1.0) / (extent * extent);
    return 1e-6 * scale * scale;
}

ImageLocal image_local_analytic(const AnalyticSurface& s, const Vec3& light, const Vec2& p, double albedo) {
    const Jet<3> f = s.jet(p);
    const Jet<2> fx = f.dx(), fy = f.dy();
    const Jet<2> w = sqrt(Jet<2>(1.0) + fx * fx + fy * fy);
    const Jet<2> num = fx * (-light.x()) + fy * (-light.y()) + Jet<2>(light.z());
    const Jet<2> i = num / w * albedo;
    ImageLocal out;
    out.value = i.value();
    out.grad = {i.d(1, 0), i.d(0, 1)};
    out.hess << i.d(2, 0), i.d(1, 1), i.d(1, 1), i.d(0, 2);
    return out;
}

ImageLocal image_local_fd(const AnalyticSurface& s, const Vec3& light, const Vec2& p, double h, double albedo) {
    if (!(h > 0)) throw ParameterError("fd_step must be positive");
    double v[3][3];
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            v[i + 1][j + 1] = albedo * std::max(0.0, light.dot(normal_at(s, p + Vec2(i * h, j * h))));
    ImageLocal out;
    out.value = v[1][1];
    out.grad = {(v[2][1] - v[0][1]) / (2 * h), (v[1][2] - v[1][0]) / (2 * h)};
    const double xx = (v[2][1] - 2 * v[1][1] + v[0][1]) / (h * h);
    const double yy = (v[1][2] - 2 * v[1][1] + v[1][0]) / (h * h);
    const double xy = (v[2][2] - v[2][0] - v[0][2] + v[0][0]) / (4 * h * h);
    out.hess << xx, xy, xy, yy;
    return out;
}

std::array<EquationResidual, 3> eval_shading_eqs(const AnalyticSurface& s, const Vec3& light, const Vec2& p,
                                                 const ShadingOptions& opt) {
    const Context c = prepare(s, light, p, opt);
    require_conditioned(s, c, opt);
    const SurfaceDerivs& d = c.d;
    const double I = c.img.value;
    const Vec2 gI = c.img.grad;
    const double gn = gI.norm();
    const Vec2 u = gI / gn, v = opt.flip_v ? Vec2(-turn(u)) : turn(u);
    const Mat2 hinv = d.hess.inverse();
    const Vec3 dnu = shape_map(d, u), dnv = shape_map(d, v);
    const Vec3 gf = lift_tangent(d, d.grad);
    const Mat2& hi = c.img.hess;
    auto third = [&](const Vec2& a, const Vec2& b) { return gI.dot(hinv * d.third_contract(a, b)); };
    const double scale = hi.norm();

    std::array<EquationResidual, 3> out{
        make_residual(p, EqId::E1, v.dot(hi * v), {-I * dnv.squaredNorm(), third(v, v)}, scale),
        make_residual(p, EqId::E2, u.dot(hi * u),
                      {-I * dnu.squaredNorm(), -2 * gn / c.w * gf.dot(dnu), third(u, u)}, scale),
        make_residual(p, EqId::E3, u.dot(hi * v), {-I * dnv.dot(dnu), -gn / c.w * gf.dot(dnv), third(u, v)},
                      scale),
    };
    for (auto& r : out) stamp(r, c);
    return out;
}

EquationResidual eval_shading_eq(const AnalyticSurface& s, const Vec3& light, const Vec2& p, int eq,
                                 const ShadingOptions& opt) {
    if (eq < 1 || eq > 3) throw ParameterError("eval_shading_eq: eq must be 1, 2 or 3");
    return eval_shading_eqs(s, light, p, opt)[static_cast<std::size_t>(eq - 1)];
}

EquationResidual eval_eq4(const AnalyticSurface& s, const Vec3& light, const Vec2& p, const ShadingOptions& opt) {
    const Context c = prepare(s, light, p, opt);
    require_conditioned(s, c, opt);
    const double I = c.img.value;
    if (!(I > opt.intensity_floor)) throw DomainError("intensity below floor");
    const Vec2 gI = c.img.grad;
    const double gn = gI.norm();
    const Vec2 u = gI / gn, v = opt.flip_v ? Vec2(-turn(u)) : turn(u);
    const Vec2 kappa = -(v.dot(c.img.hess * v) / gn) * u;
    const double lhs = gI.dot(kappa) / I;
    const double rhs = shape_map(c.d, v).squaredNorm();
    const double correction = -gI.dot(c.d.hess.inverse() * c.d.third_contract(v, v)) / I;
    EquationResidual r = make_residual(p, EqId::E4, lhs, {rhs});
    r.rel_residual = r.abs_residual / std::max({std::abs(lhs), std::abs(rhs), std::abs(correction), kResidualFloor});
    r.correction = correction;
    stamp(r, c);
    return r;
}

std::vector<EquationResidual> eval_ridge_eqs(const AnalyticSurface& s, const Vec3& light, const Vec2& p,
                                             const ShadingOptions& opt) {
    const Context c = prepare(s, light, p, opt);
    const SurfaceDerivs& d = c.d;
    const Mat2& hi = c.img.hess;

    const Eigen::SelfAdjointEigenSolver<Mat2> ies(hi);
    const int k = std::abs(ies.eigenvalues()(0)) <= std::abs(ies.eigenvalues()(1)) ? 0 : 1;
    Vec2 u = ies.eigenvectors().col(k).normalized();
    if (u.x() < 0 || (u.x() == 0 && u.y() < 0)) u = -u;
    const Vec2 v = opt.flip_v ? Vec2(-turn(u)) : turn(u);

    // flat principal direction: H a = lambda G a with the smaller |lambda|
    const Mat2 g = Mat2::Identity() + d.grad * d.grad.transpose();
    const Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> pes(d.hess, g);
    const int m = std::abs(pes.eigenvalues()(0)) <= std::abs(pes.eigenvalues()(1)) ? 0 : 1;
    const Vec2 w = pes.eigenvectors().col(m).normalized();
    const double mis = std::acos(std::min(1.0, std::abs(u.dot(w)))) * 180 / M_PI;
    if (mis > opt.theta_align_deg)
        throw DomainError("ridge reduction: flat principal direction is " + std::to_string(mis) +
                          " deg from the ridge direction");

    const Vec3 lt = light - light.dot(c.normal) * c.normal;
    const Vec3 uh = lift_tangent(d, u), vh = lift_tangent(d, v);
    Mat2 gram;
    gram << uh.dot(uh), uh.dot(vh), uh.dot(vh), vh.dot(vh);
    const Vec2 l = gram.ldlt().solve(Vec2(uh.dot(lt), vh.dot(lt)));
    // l2 scaled by albedo and the foreshortening factor
    const double l2w = l.y() * opt.albedo / c.w;
    const double I = c.img.value;

    std::vector<EquationResidual> out{
        make_residual(p, EqId::E5a, v.dot(hi * v),
                      {-I * shape_map(d, v).squaredNorm(), l2w * d.third_directional(v, v, u)}, hi.norm()),
        make_residual(p, EqId::E5b, u.dot(hi * u), {l2w * d.third_directional(u, u, u)}, hi.norm()),
        make_residual(p, EqId::E5c, u.dot(hi * v), {l2w * d.third_directional(v, u, u)}, hi.norm()),
    };
    for (auto& r : out) {
        stamp(r, c);
        r.misalignment_deg = mis;
    }
    return out;
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    const auto idx = static_cast<std::size_t>(std::max(0.0, std::ceil(q * n) - 1));
    return v[std::min(idx, v.size() - 1)];
}

const SweepRow* SweepReport::overall(EqId eq) const {
    for (const auto& r : rows)
        if (r.eq == eq && r.decile < 0) return &r;
    return nullptr;
}

void SweepReport::write_csv(std::ostream& os) const {
    os << "eq,decile,det_lo,det_hi,count,median,p95,max\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%.9e,%.9e,%zu,%.9e,%.9e,%.9e\n", to_string(r.eq).c_str(), r.decile,
                      r.det_lo, r.det_hi, r.count, r.median, r.p95, r.max);
        os << buf;
    }
}

SweepReport residual_sweep(const AnalyticSurface& s, const std::vector<Vec3>& lights,
                           const std::vector<Vec2>& points, const std::vector<EqId>& eqs,
                           const ShadingOptions& opt_in) {
    ShadingOptions opt = opt_in;
    if (opt.delta_h < 0) opt.delta_h = default_delta_h(s);
    auto wants = [&](EqId e) { return std::find(eqs.begin(), eqs.end(), e) != eqs.end(); };
    const bool base = wants(EqId::E1) || wants(EqId::E2) || wants(EqId::E3);
    const bool ridge = wants(EqId::E5a) || wants(EqId::E5b) || wants(EqId::E5c);

    const int pairs = static_cast<int>(lights.size() * points.size());
    std::vector<std::vector<EquationResidual>> per(static_cast<std::size_t>(pairs));
    std::vector<std::uint8_t> failed(static_cast<std::size_t>(pairs), 0);
    parallel_for(pairs, [&](int k) {
        const auto& L = lights[static_cast<std::size_t>(k) / points.size()];
        const auto& p = points[static_cast<std::size_t>(k) % points.size()];
        auto& out = per[static_cast<std::size_t>(k)];
        try {
            if (base)
                for (const auto& r : eval_shading_eqs(s, L, p, opt))
                    if (wants(r.eq)) out.push_back(r);
            if (wants(EqId::E4)) out.push_back(eval_eq4(s, L, p, opt));
            if (ridge)
                for (const auto& r : eval_ridge_eqs(s, L, p, opt))
                    if (wants(r.eq)) out.push_back(r);
        } catch (const DomainError&) {
            out.clear();
            failed[static_cast<std::size_t>(k)] = 1;
        }
    });

    SweepReport rep;
    for (int k = 0; k < pairs; ++k) {
        rep.skipped += failed[static_cast<std::size_t>(k)];
        for (auto& r : per[static_cast<std::size_t>(k)]) rep.residuals.push_back(r);
    }
    for (EqId eq : eqs) {
        std::vector<const EquationResidual*> rs;
        for (const auto& r : rep.residuals)
            if (r.eq == eq) rs.push_back(&r);
        if (rs.empty()) continue;
        std::stable_sort(rs.begin(), rs.end(),
                         [](auto* a, auto* b) { return std::abs(a->det_h) < std::abs(b->det_h); });
        auto summarize = [&](int decile, std::size_t lo, std::size_t hi) {
            std::vector<double> rel;
            for (std::size_t i = lo; i < hi; ++i) rel.push_back(rs[i]->rel_residual);
            if (rel.empty()) return;
            SweepRow row{eq, decile, std::abs(rs[lo]->det_h), std::abs(rs[hi - 1]->det_h), rel.size(),
                         percentile(rel, 0.5), percentile(rel, 0.95), *std::max_element(rel.begin(), rel.end())};
            rep.rows.push_back(row);
        };
        summarize(-1, 0, rs.size());
        for (int dcl = 0; dcl < 10; ++dcl) summarize(dcl, rs.size() * dcl / 10, rs.size() * (dcl + 1) / 10);
    }
    return rep;
}

}  // namespace critcon
