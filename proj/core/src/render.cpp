#include "critcon/render.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace critcon {

namespace {

void check_light(const Vec3& l, const char* what) {
    if (std::abs(l.norm() - 1.0) > 1e-9) throw ParameterError(std::string(what) + ": light must be unit length");
    if (!(l.z() > 0)) throw ParameterError(std::string(what) + ": light must be in the front hemisphere");
}

const Vec3 kView(0, 0, 1);

}  // namespace

void validate(const RenderSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Lambertian>) {
                check_light(s.light, "Lambertian");
                if (!(s.albedo > 0 && s.albedo <= 1)) throw ParameterError("Lambertian: albedo must be in (0, 1]");
            } else if constexpr (std::is_same_v<T, Specular>) {
                check_light(s.light, "Specular");
                if (!(s.exponent >= 1)) throw ParameterError("Specular: exponent must be >= 1");
                if (s.diffuse_weight < 0 || s.specular_weight < 0 ||
                    s.diffuse_weight + s.specular_weight > 1 + 1e-12)
                    throw ParameterError("Specular: weights must be nonnegative and sum to at most 1");
            } else if constexpr (std::is_same_v<T, MonotoneOfCos>) {
                check_light(s.light, "MonotoneOfCos");
                if (!(s.gamma > 0 && s.gamma <= 1)) throw ParameterError("MonotoneOfCos: gamma must be in (0, 1]");
            } else if constexpr (std::is_same_v<T, LambertianSum>) {
                if (s.lights.empty() || s.lights.size() != s.weights.size())
                    throw ParameterError("LambertianSum: need one weight per light");
                for (const auto& l : s.lights) check_light(l, "LambertianSum");
                for (double w : s.weights)
                    if (w < 0) throw ParameterError("LambertianSum: weights must be nonnegative");
            }
        },
        spec);
}

std::string describe(const RenderSpec& spec) {
    std::ostringstream os;
    os.precision(6);
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            auto light = [&](const Vec3& l) { os << "(" << l.x() << "," << l.y() << "," << l.z() << ")"; };
            if constexpr (std::is_same_v<T, Lambertian>) {
                os << "lambertian L=";
                light(s.light);
                os << " albedo=" << s.albedo;
            } else if constexpr (std::is_same_v<T, Specular>) {
                os << "specular L=";
                light(s.light);
                os << " exponent=" << s.exponent << " kd=" << s.diffuse_weight << " ks=" << s.specular_weight;
            } else if constexpr (std::is_same_v<T, SlantImage>) {
                os << "slant";
            } else if constexpr (std::is_same_v<T, MonotoneOfCos>) {
                os << "monotone_cos L=";
                light(s.light);
                os << " gamma=" << s.gamma;
            } else {
                os << "lambertian_sum n=" << s.lights.size();
            }
        },
        spec);
    return os.str();
}

double shade(const Vec3& n, const RenderSpec& spec) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Lambertian>) {
                return s.albedo * std::max(s.light.dot(n), 0.0);
            } else if constexpr (std::is_same_v<T, Specular>) {
                const Vec3 half = (s.light + kView).normalized();
                const double lobe = std::pow(std::max(n.dot(half), 0.0), s.exponent);
                return s.diffuse_weight * std::max(s.light.dot(n), 0.0) + s.specular_weight * lobe;
            } else if constexpr (std::is_same_v<T, SlantImage>) {
                return std::atan2(std::hypot(n.x(), n.y()), n.z()) * (2.0 / M_PI);
            } else if constexpr (std::is_same_v<T, MonotoneOfCos>) {
                return std::pow(std::max(s.light.dot(n), 0.0), s.gamma);
            } else {
                double acc = 0;
                for (std::size_t i = 0; i < s.lights.size(); ++i)
                    acc += s.weights[i] * std::max(s.lights[i].dot(n), 0.0);
                return acc;
            }
        },
        spec);
}

namespace {
const Vec3* primary_light(const RenderSpec& spec) {
    if (auto* l = std::get_if<Lambertian>(&spec)) return &l->light;
    if (auto* s = std::get_if<Specular>(&spec)) return &s->light;
    if (auto* m = std::get_if<MonotoneOfCos>(&spec)) return &m->light;
    if (auto* m = std::get_if<LambertianSum>(&spec)) return &m->lights.front();
    return nullptr;
}
}  // namespace

RenderResult render(const NormalField& n, const RenderSpec& spec) {
    validate(spec);
    RenderResult out{ScalarGrid(n.spec), 0.0, false};
    auto vals = out.image.values();
    const Vec3* light = primary_light(spec);
    std::size_t shadowed = 0;
    for (std::size_t i = 0; i < n.n.size(); ++i) {
        vals[i] = std::clamp(shade(n.n[i], spec), 0.0, 1.0);
        if (light && light->dot(n.n[i]) <= 0) ++shadowed;
    }
    out.shadow_fraction = n.n.empty() ? 0.0 : static_cast<double>(shadowed) / static_cast<double>(n.n.size());
    out.shadow_warning = out.shadow_fraction > kShadowWarningFraction;
    return out;
}

AdmissibilityReport admissibility_probe(const RenderSpec& spec, int resolution) {
    validate(spec);
    const GridSpec g = GridSpec::square(resolution, -1.0, 1.0);
    std::vector<double> img(g.size(), 0.0);
    std::vector<Vec3> nrm(g.size());
    std::vector<char> inside(g.size(), 0);
    for (int r = 0; r < resolution; ++r)
        for (int c = 0; c < resolution; ++c) {
            const Vec2 p = g.world(c, r);
            const double rho2 = p.squaredNorm();
            if (rho2 >= 1.0) continue;
            const std::size_t i = static_cast<std::size_t>(r) * resolution + c;
            inside[i] = 1;
            nrm[i] = Vec3(p.x(), p.y(), std::sqrt(1.0 - rho2));
            img[i] = shade(nrm[i], spec);
        }
    AdmissibilityReport rep;
    for (int r = 0; r < resolution; ++r)
        for (int c = 0; c < resolution; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * resolution + c;
            if (!inside[i]) continue;
            bool strict_max = true;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (!dr && !dc) continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= resolution || cc >= resolution) continue;
                    const std::size_t j = static_cast<std::size_t>(rr) * resolution + cc;
                    if (!inside[j]) continue;
                    if (img[j] >= img[i]) strict_max = false;
                    if (dr >= 0 && (dr > 0 || dc > 0)) {
                        const double angle = std::acos(std::clamp(nrm[i].dot(nrm[j]), -1.0, 1.0));
                        if (angle > 0) rep.variation_ratio = std::max(rep.variation_ratio, std::abs(img[j] - img[i]) / angle);
                    }
                }
            rep.maxima += strict_max;
        }
    return rep;
}

double BlurSequence::length_px() const {
    double len = 0;
    for (std::size_t i = 1; i < contour.size(); ++i) len += (contour[i] - contour[i - 1]).norm();
    if (closed && contour.size() > 1) len += (contour.front() - contour.back()).norm();
    return len;
}

void BlurSequence::validate() const {
    if (contour.size() < 2 || !(length_px() > 0)) throw ParameterError("BlurSequence: contour has zero length");
    if (density.size() != contour.size()) throw ParameterError("BlurSequence: need one density per vertex");
    if (!closed && (density.front() != 0.0 || density.back() != 0.0))
        throw ParameterError("BlurSequence: open contour must carry zero intensity at its endpoints");
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (!(sigmas[i] > 0)) throw ParameterError("BlurSequence: blur widths must be positive");
        if (i > 0 && !(sigmas[i] < sigmas[i - 1]))
            throw ParameterError("BlurSequence: blur widths must be strictly decreasing");
    }
}

ScalarGrid gaussian_blur(const ScalarGrid& g, double sigma_px) {
    if (!(sigma_px > 0)) throw ParameterError("gaussian_blur: sigma must be positive");
    const int radius = std::max(1, static_cast<int>(std::floor(3.0 * sigma_px)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-0.5 * i * i / (sigma_px * sigma_px));
    for (double& v : k) v /= sum;
    const int w = g.width(), h = g.height();
    ScalarGrid tmp(g.spec()), out(g.spec());
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i)
                if (c + i >= 0 && c + i < w) acc += k[i + radius] * g(c + i, r);
            tmp(c, r) = acc;
        }
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i)
                if (r + i >= 0 && r + i < h) acc += k[i + radius] * tmp(c, r + i);
            out(c, r) = acc;
        }
    return out;
}

ScalarGrid blur_contour(const BlurSequence& seq, double sigma, const GridSpec& canvas) {
    seq.validate();
    if (!(sigma > 0)) throw ParameterError("blur_contour: sigma must be positive");
    const double margin = 3.0 * sigma;
    for (const Vec2& p : seq.contour)
        if (p.x() < margin || p.y() < margin || p.x() > canvas.width - 2 - margin ||
            p.y() > canvas.height - 2 - margin)
            throw ParameterError("blur_contour: contour touches the 3 sigma canvas margin");

    ScalarGrid mass(canvas);
    const double inv_area = 1.0 / (canvas.spacing * canvas.spacing);
    const std::size_t n = seq.contour.size();
    const std::size_t segments = seq.closed ? n : n - 1;
    for (std::size_t s = 0; s < segments; ++s) {
        const Vec2& a = seq.contour[s];
        const Vec2& b = seq.contour[(s + 1) % n];
        const double da = seq.density[s], db = seq.density[(s + 1) % n];
        const double len = (b - a).norm();
        if (len == 0) continue;
        const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.05)));
        for (int k = 0; k < steps; ++k) {
            const double t = (k + 0.5) / steps;
            const Vec2 p = a + t * (b - a);
            const double m = ((1 - t) * da + t * db) * len * canvas.spacing / steps;
            const int c0 = static_cast<int>(std::floor(p.x()));
            const int r0 = static_cast<int>(std::floor(p.y()));
            const double fx = p.x() - c0, fy = p.y() - r0;
            mass(c0, r0) += m * (1 - fx) * (1 - fy) * inv_area;
            mass(c0 + 1, r0) += m * fx * (1 - fy) * inv_area;
            mass(c0, r0 + 1) += m * (1 - fx) * fy * inv_area;
            mass(c0 + 1, r0 + 1) += m * fx * fy * inv_area;
        }
    }
    return gaussian_blur(mass, sigma);
}

}  // namespace critcon
