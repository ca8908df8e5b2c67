#include "jmgt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jmgt {

void ModelParams::validate() const {
    if (!(tau >= 0.0) || !(sigma0 > 0.0) || !(beta > 0.0) || !(omega > 0.0))
        throw ValidationError("model parameters must satisfy tau >= 0, sigma0 > 0, beta > 0, omega > 0");
    if (tau > sigma0 * beta * (1.0 + 1e-14))
        throw ValidationError("stability requirement sigma*beta >= tau violated");
}

void DomainSpec::validate() const {
    if (!(Lx > 0.0) || (kind == DomainKind::Rectangle && !(Ly > 0.0)))
        throw ValidationError("domain lengths must be positive");
    for (double g : gamma)
        if (g < 0.0) throw ValidationError("Robin coefficients must be nonnegative");
    if (J < 1) throw ValidationError("need at least one mode");
    if (oversample < 2) throw ValidationError("quadrature oversampling must be at least 2");
    if (sigma.empty()) throw ValidationError("observation set is empty");
    if (!sigma_weights.empty() && sigma_weights.size() != sigma.size())
        throw ValidationError("observation weights do not match observation points");
    const double ly = kind == DomainKind::Rectangle ? Ly : 0.0;
    for (const auto& p : sigma) {
        if (p.x < -1e-12 || p.x > Lx + 1e-12 || p.y < -1e-12 || p.y > ly + 1e-12)
            throw ValidationError("observation point outside the domain");
    }
}

double Mode1D::value(double x) const {
    if (k == 0.0) return c;
    return c * (k * std::cos(k * x) + g0 * std::sin(k * x));
}

double Mode1D::deriv(double x) const {
    if (k == 0.0) return 0.0;
    return c * k * (-k * std::sin(k * x) + g0 * std::cos(k * x));
}

namespace {

double secular(double k, double L, double g0, double g1) {
    return (k * k - g0 * g1) * std::sin(k * L) - k * (g0 + g1) * std::cos(k * L);
}

double bisect(double lo, double hi, double L, double g0, double g1) {
    double flo = secular(lo, L, g0, g1);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = secular(mid, L, g0, g1);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double norm_const(double k, double g0, double L) {
    if (k == 0.0) return 1.0 / std::sqrt(L);
    const double s2 = std::sin(2.0 * k * L) / (4.0 * k);
    const double sl = std::sin(k * L);
    const double n2 = k * k * (0.5 * L + s2) + g0 * g0 * (0.5 * L - s2) + g0 * sl * sl;
    return 1.0 / std::sqrt(n2);
}

}  // namespace

std::vector<double> robin_wavenumbers(double L, double g0, double g1, int count) {
    std::vector<double> ks;
    ks.reserve(count);
    if (g0 == 0.0 && g1 == 0.0) {
        for (int n = 0; n < count; ++n) ks.push_back(n * pi / L);
        return ks;
    }
    // One root per interval (n pi/L, (n+1) pi/L) for nonnegative Robin data.
    constexpr int sub = 16;
    for (int n = 0; static_cast<int>(ks.size()) < count; ++n) {
        const double a = n * pi / L;
        const double h = (pi / L) / sub;
        int found = 0;
        double root = 0.0;
        double x0 = (n == 0) ? 1e-12 * h : a;
        double f0 = secular(x0, L, g0, g1);
        for (int s = 1; s <= sub; ++s) {
            const double x1 = a + s * h;
            const double f1 = secular(x1, L, g0, g1);
            if (f0 == 0.0 && s > 1) {
                root = x0;
                ++found;
            } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
                root = bisect(x0, x1, L, g0, g1);
                ++found;
            }
            x0 = x1;
            f0 = f1;
        }
        if (found != 1)
            throw NumericalError("Robin bisection bracket failure in interval " + std::to_string(n));
        ks.push_back(root);
    }
    return ks;
}

std::vector<Mode1D> robin_modes(double L, double g0, double g1, int count) {
    std::vector<Mode1D> modes;
    for (double k : robin_wavenumbers(L, g0, g1, count)) {
        Mode1D md;
        md.k = k;
        md.g0 = g0;
        md.c = norm_const(k, g0, L);
        modes.push_back(md);
    }
    return modes;
}

void gauss_legendre(int n, double a, double b, VecR& x, VecR& w) {
    x.resize(n);
    w.resize(n);
    const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x(i) = xm - xl * z;
        x(n - 1 - i) = xm + xl * z;
        w(i) = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        w(n - 1 - i) = w(i);
    }
}

std::vector<Point> sample_segment(Point a, Point b, int n, std::vector<double>* weights) {
    VecR t, w;
    gauss_legendre(n, 0.0, 1.0, t, w);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    std::vector<Point> pts(n);
    if (weights) weights->assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        pts[i] = {a.x + t(i) * (b.x - a.x), a.y + t(i) * (b.y - a.y)};
        if (weights) (*weights)[i] = w(i) * len;
    }
    return pts;
}

double Basis::eval(int j, Point p) const {
    const auto [i, k] = index[j];
    if (domain.kind == DomainKind::Interval) return xmodes[i].value(p.x);
    return xmodes[i].value(p.x) * ymodes[k].value(p.y);
}

double Basis::normal_derivative(int j, Point p) const {
    const auto [i, k] = index[j];
    const double tol = 1e-12;
    double dn = 0.0;
    const bool rect = domain.kind == DomainKind::Rectangle;
    const double fy = rect ? ymodes[k].value(p.y) : 1.0;
    if (std::abs(p.x) < tol) dn += -xmodes[i].deriv(p.x) * fy;
    if (std::abs(p.x - domain.Lx) < tol) dn += xmodes[i].deriv(p.x) * fy;
    if (rect) {
        const double fx = xmodes[i].value(p.x);
        if (std::abs(p.y) < tol) dn += -ymodes[k].deriv(p.y) * fx;
        if (std::abs(p.y - domain.Ly) < tol) dn += ymodes[k].deriv(p.y) * fx;
    }
    return dn;
}

Basis build_basis(const DomainSpec& spec) {
    spec.validate();
    Basis b;
    b.domain = spec;
    const int J = spec.J;
    const auto& g = spec.gamma;

    if (spec.kind == DomainKind::Interval) {
        b.xmodes = robin_modes(spec.Lx, g[0], g[1], J);
        b.lambda.resize(J);
        for (int j = 0; j < J; ++j) {
            b.index.emplace_back(j, 0);
            b.lambda(j) = b.xmodes[j].lambda();
        }
        const int nq = spec.oversample * J + 8;
        VecR x, w;
        gauss_legendre(nq, 0.0, spec.Lx, x, w);
        b.nodes = MatR::Zero(2, nq);
        b.nodes.row(0) = x.transpose();
        b.weights = w;
    } else {
        const int n1 = J + 1;
        b.xmodes = robin_modes(spec.Lx, g[0], g[1], n1);
        b.ymodes = robin_modes(spec.Ly, g[2], g[3], n1);
        std::vector<std::tuple<double, int, int>> all;
        for (int i = 0; i < n1; ++i)
            for (int k = 0; k < n1; ++k)
                all.emplace_back(b.xmodes[i].lambda() + b.ymodes[k].lambda(), i, k);
        std::sort(all.begin(), all.end());
        for (int j = 0; j + 1 < std::min<int>(J + 1, static_cast<int>(all.size())); ++j) {
            const double l0 = std::get<0>(all[j]), l1 = std::get<0>(all[j + 1]);
            if (l1 - l0 <= 1e-9 * std::max(1.0, l1))
                throw ValidationError("degenerate rectangle spectrum; choose incommensurate side lengths");
        }
        b.lambda.resize(J);
        int imax = 0, kmax = 0;
        for (int j = 0; j < J; ++j) {
            const auto [lam, i, k] = all[j];
            b.lambda(j) = lam;
            b.index.emplace_back(i, k);
            imax = std::max(imax, i);
            kmax = std::max(kmax, k);
        }
        const int nx = spec.oversample * (imax + 1) + 8;
        const int ny = spec.oversample * (kmax + 1) + 8;
        VecR x, wx, y, wy;
        gauss_legendre(nx, 0.0, spec.Lx, x, wx);
        gauss_legendre(ny, 0.0, spec.Ly, y, wy);
        b.nodes.resize(2, nx * ny);
        b.weights.resize(nx * ny);
        for (int i = 0; i < nx; ++i)
            for (int k = 0; k < ny; ++k) {
                b.nodes(0, i * ny + k) = x(i);
                b.nodes(1, i * ny + k) = y(k);
                b.weights(i * ny + k) = wx(i) * wy(k);
            }
    }

    const int nq = static_cast<int>(b.weights.size());
    b.phi.resize(nq, J);
    for (int q = 0; q < nq; ++q)
        for (int j = 0; j < J; ++j) b.phi(q, j) = b.eval(j, {b.nodes(0, q), b.nodes(1, q)});
    b.phiw = b.phi.transpose() * b.weights.asDiagonal();

    const int ns = static_cast<int>(spec.sigma.size());
    b.trace.resize(ns, J);
    for (int s = 0; s < ns; ++s)
        for (int j = 0; j < J; ++j) b.trace(s, j) = b.eval(j, spec.sigma[s]);
    b.sigma_w = spec.sigma_weights.empty() ? VecR::Ones(ns)
                                           : Eigen::Map<const VecR>(spec.sigma_weights.data(), ns).eval();
    return b;
}

MatR gram_matrix(const Basis& basis) { return basis.phiw * basis.phi; }

std::vector<int> trace_rank(const Basis& basis, double tol) {
    std::vector<int> ranks(basis.size());
    for (int l = 0; l < basis.size(); ++l) {
        const double n = std::sqrt((basis.trace.col(l).array().square() * basis.sigma_w.array()).sum());
        ranks[l] = n > tol ? 1 : 0;
        if (ranks[l] == 0)
            throw ValidationError("trace of eigenspace " + std::to_string(l) + " vanishes on the observation set");
    }
    return ranks;
}

cd trace_inverse(const VecC& v, const Basis& basis, int l) {
    const VecR t = basis.trace.col(l);
    const VecR tw = t.cwiseProduct(basis.sigma_w);
    return tw.cast<cd>().dot(v) / tw.dot(t);
}

}  // namespace jmgt
