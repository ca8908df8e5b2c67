#include "jmgt/reconstruct.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace jmgt {

Eigen::Vector2cd rhs_interpolant(const FieldPair& r, int l, cd o, double omega, bool scaled) {
    Eigen::Vector2cd v;
    for (int nu = 0; nu < 2; ++nu) v(nu) = harmonic_interpolant(r[nu].c.row(l).transpose(), o, omega, scaled);
    return v;
}

cd residue_weight(cd p, const ModelParams& params) { return Theta(p, params) * Psi_d(p, params) / (p * p); }

Residues residues_oracle(const Basis& basis, const LinInput& truth, const FieldPair& r, const PoleSet& poles,
                         const SourcePair& src, const ModelParams& params) {
    const int J = basis.size(), ns = basis.sigma_size();
    Residues out;
    out.res.resize(J);
    for (int l = 0; l < J; ++l) {
        const cd p = poles.p(l);
        const double lam = basis.lambda(l);
        const Eigen::Vector2cd a(truth.a_sigma(l), truth.a_eta(l));
        const Eigen::Vector2cd g = rhs_interpolant(r, l, p, params.omega, true) - src.interp(p, true) * a;
        const cd w = p * p / dispersion_d(p, lam, params);
        out.res[l].resize(2, ns);
        for (int s = 0; s < ns; ++s) out.res[l].col(s) = w * g * basis.trace(s, l);
    }
    return out;
}

Residues residues_fit(const Basis& basis, const std::array<MatC, 2>& pdat, const FieldPair& r,
                      const PoleSet& poles, const SourcePair& src, const ModelParams& params,
                      const FitOptions& opt) {
    const int J = basis.size(), ns = basis.sigma_size(), M = src.M();
    const double w = params.omega;
    const int extra = opt.analytic_part ? 3 : 0;
    if (M < J + extra) throw ValidationError("too few harmonics for the residue fit");

    // Design matrix: normalized partial fractions with unit residue at p_l.
    MatC H(M, J + extra);
    std::vector<Eigen::Matrix2cd> frak_inv(M);
    for (int m = 1; m <= M; ++m) {
        const cd o = lattice_point(m, w);
        const cd ps = Psi(o, params);
        for (int l = 0; l < J; ++l) {
            const cd p = poles.p(l);
            H(m - 1, l) = o * o * Psi_d(p, params) / (p * p * (ps - basis.lambda(l)));
        }
        if (extra) {
            H(m - 1, J) = 1.0;
            H(m - 1, J + 1) = 1.0 / o;
            H(m - 1, J + 2) = 1.0 / (o * o);
        }
        frak_inv[m - 1] = src.frak(m).inverse();
    }
    // Rows back in observation units, so inconsistent data are not dominated by high harmonics.
    VecR roww = VecR::Ones(M);
    if (opt.data_units)
        for (int m = 1; m <= M; ++m)
            roww(m - 1) = 1.0 / (std::abs(Theta(lattice_point(m, w), params)) * frak_inv[m - 1].operatorNorm());
    H = roww.cast<cd>().asDiagonal() * H;
    const VecR scale = H.colwise().norm().transpose();
    const MatC Hs = H * scale.cwiseInverse().cast<cd>().asDiagonal();
    Eigen::BDCSVD<MatC> svd(Hs, Eigen::ComputeThinU | Eigen::ComputeThinV);

    // Interpolants at the poles, independent of the observation point.
    std::vector<Eigen::Matrix2cd> Minv(J), Mt(J);
    std::vector<Eigen::Vector2cd> rho(J);
    for (int l = 0; l < J; ++l) {
        Mt[l] = src.interp(poles.p(l), true);
        Minv[l] = src.interp_inverse(poles.p(l), true);
        rho[l] = Minv[l] * rhs_interpolant(r, l, poles.p(l), w, true);
    }

    Residues out;
    out.res.assign(J, MatC::Zero(2, ns));
    for (int s = 0; s < ns; ++s) {
        MatC rhs(M, 2);
        for (int m = 1; m <= M; ++m) {
            const cd o = lattice_point(m, w);
            const cd ps = Psi(o, params);
            const Eigen::Vector2cd pm(pdat[0](s, m - 1), pdat[1](s, m - 1));
            Eigen::Vector2cd e = Theta(o, params) * (frak_inv[m - 1] * pm);
            for (int j = 0; j < J; ++j) {
                const Eigen::Vector2cd rj(r[0].c(j, m - 1), r[1].c(j, m - 1));
                e += (o * o / (ps - basis.lambda(j))) * (frak_inv[m - 1] * rj) * basis.trace(s, j);
            }
            rhs.row(m - 1) = e.transpose();
        }
        const MatC coef = scale.cwiseInverse().cast<cd>().asDiagonal() * svd.solve(roww.cast<cd>().asDiagonal() * rhs);
        for (int l = 0; l < J; ++l) {
            const cd p = poles.p(l);
            const cd k = p * p / Psi_d(p, params);
            Eigen::Vector2cd resd = coef.row(l).transpose() - k * rho[l] * basis.trace(s, l);
            out.res[l].col(s) = Mt[l] * resd / Theta(p, params);
        }
    }
    return out;
}

CoefficientSplit split_coefficients(const Basis& basis, const Residues& res, const FieldPair& r,
                                    const PoleSet& poles, const SourcePair& src, const ModelParams& params) {
    const int J = basis.size(), ns = basis.sigma_size();
    CoefficientSplit sp;
    sp.obs.resize(J);
    sp.mod.resize(J);
    for (int l = 0; l < J; ++l) {
        const cd p = poles.p(l);
        const Eigen::Matrix2cd Minv = src.interp_inverse(p, true);
        Eigen::Vector2cd c;
        for (int q = 0; q < 2; ++q) {
            VecC v(ns);
            for (int s = 0; s < ns; ++s) v(s) = (Minv * res.res[l].col(s))(q);
            c(q) = trace_inverse(v, basis, l);
        }
        sp.obs[l] = residue_weight(p, params) * c;
        sp.mod[l] = Minv * rhs_interpolant(r, l, p, params.omega, true);
    }
    return sp;
}

void recover_coefficients(const CoefficientSplit& split, VecC& a_sigma, VecC& a_eta) {
    const int J = static_cast<int>(split.obs.size());
    a_sigma.resize(J);
    a_eta.resize(J);
    for (int l = 0; l < J; ++l) {
        const Eigen::Vector2cd a = split.obs[l] + split.mod[l];
        a_sigma(l) = a(0);
        a_eta(l) = a(1);
    }
}

FieldPair recover_state(const Basis& basis, const VecC& a_sigma, const VecC& a_eta, const FieldPair& r,
                        const SourcePair& src, const ModelParams& params) {
    const int J = basis.size(), M = src.M();
    FieldPair u{HarmonicField(J, M), HarmonicField(J, M)};
    for (int m = 1; m <= M; ++m) {
        const cd o = lattice_point(m, params.omega);
        const Eigen::Matrix2cd F = src.frak(m);
        for (int l = 0; l < J; ++l) {
            const Eigen::Vector2cd a(a_sigma(l), a_eta(l));
            const Eigen::Vector2cd rr(r[0].c(l, m - 1), r[1].c(l, m - 1));
            const Eigen::Vector2cd b = (-o * o / dispersion(o, basis.lambda(l), params)) * (F * a - rr);
            u[0].c(l, m - 1) = b(0);
            u[1].c(l, m - 1) = b(1);
        }
    }
    return u;
}

namespace {

Reconstruction finish(const Basis& basis, Residues res, const FieldPair& r, const PoleSet& poles,
                      const SourcePair& src, const ModelParams& params) {
    Reconstruction out;
    out.residues = std::move(res);
    out.split = split_coefficients(basis, out.residues, r, poles, src, params);
    recover_coefficients(out.split, out.xi.a_sigma, out.xi.a_eta);
    out.xi.u = recover_state(basis, out.xi.a_sigma, out.xi.a_eta, r, src, params);
    return out;
}

}  // namespace

Reconstruction reconstruct(const Basis& basis, const LinData& data, const PoleSet& poles, const SourcePair& src,
                           const ModelParams& params, const FitOptions& opt) {
    return finish(basis, residues_fit(basis, data.p, data.r, poles, src, params, opt), data.r, poles, src, params);
}

Reconstruction reconstruct_oracle(const Basis& basis, const LinInput& truth, const LinData& data,
                                  const PoleSet& poles, const SourcePair& src, const ModelParams& params) {
    return finish(basis, residues_oracle(basis, truth, data.r, poles, src, params), data.r, poles, src, params);
}

}  // namespace jmgt
