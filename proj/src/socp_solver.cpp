#include "dynbf/socp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace dynbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cone rows are handled blockwise; a NonNeg block of dim d counts d toward the
// barrier degree, a second-order block counts 1.
struct Block {
    bool soc;
    int off;  // offset into the cone-row part
    int dim;
};

struct SplitProgram {
    int n = 0, p = 0, m = 0;
    Mat Aeq, G;
    Vec beq, h;
    std::vector<Block> blocks;
    std::vector<int> eq_rows, cone_rows;  // original row index per split row
    int degree = 0;
};

SplitProgram split_rows(const ConeProgram& prog) {
    SplitProgram sp;
    sp.n = prog.num_vars();
    int row = 0;
    for (const auto& blk : prog.cones) {
        if (blk.kind == ConeKind::Zero) {
            for (int i = 0; i < blk.dim; ++i) sp.eq_rows.push_back(row + i);
        } else {
            int off = static_cast<int>(sp.cone_rows.size());
            for (int i = 0; i < blk.dim; ++i) sp.cone_rows.push_back(row + i);
            if (blk.kind == ConeKind::SecondOrder && blk.dim > 1) {
                sp.blocks.push_back({true, off, blk.dim});
                sp.degree += 1;
            } else {
                // a one-dimensional second-order cone is the nonnegative ray
                sp.blocks.push_back({false, off, blk.dim});
                sp.degree += blk.dim;
            }
        }
        row += blk.dim;
    }
    sp.p = static_cast<int>(sp.eq_rows.size());
    sp.m = static_cast<int>(sp.cone_rows.size());
    sp.Aeq.resize(sp.p, sp.n);
    sp.beq.resize(sp.p);
    for (int i = 0; i < sp.p; ++i) {
        sp.Aeq.row(i) = prog.A.row(sp.eq_rows[i]);
        sp.beq[i] = prog.b[sp.eq_rows[i]];
    }
    sp.G.resize(sp.m, sp.n);
    sp.h.resize(sp.m);
    for (int i = 0; i < sp.m; ++i) {
        sp.G.row(i) = prog.A.row(sp.cone_rows[i]);
        sp.h[i] = prog.b[sp.cone_rows[i]];
    }
    return sp;
}

Vec cone_identity(const SplitProgram& sp) {
    Vec e = Vec::Zero(sp.m);
    for (const auto& blk : sp.blocks) {
        if (blk.soc)
            e[blk.off] = 1.0;
        else
            e.segment(blk.off, blk.dim).setOnes();
    }
    return e;
}

double cone_min_eig(const SplitProgram& sp, const Vec& u) {
    double me = kInf;
    for (const auto& blk : sp.blocks) {
        if (blk.soc) {
            double u0 = u[blk.off];
            double n1 = u.segment(blk.off + 1, blk.dim - 1).norm();
            me = std::min(me, u0 - n1);
        } else {
            me = std::min(me, u.segment(blk.off, blk.dim).minCoeff());
        }
    }
    return me;
}

// Largest a >= 0 with u + t du in the cone for all t in [0, a]; u strictly interior.
double soc_step(double u0, const Eigen::Ref<const Vec>& u1, double d0,
                const Eigen::Ref<const Vec>& d1) {
    double c0 = u0 * u0 - u1.squaredNorm();
    if (c0 <= 0) return 0.0;
    double b = 2.0 * (u0 * d0 - u1.dot(d1));
    double a = d0 * d0 - d1.squaredNorm();
    double alpha = kInf;
    if (std::abs(a) < 1e-300) {
        if (b < 0) alpha = -c0 / b;
    } else {
        double disc = b * b - 4.0 * a * c0;
        if (a < 0) {
            // exactly one positive root
            double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
            double r1 = q / a;
            double r2 = c0 / q;
            alpha = r1 > 0 ? r1 : r2;
        } else if (disc >= 0 && b < 0) {
            // both roots positive; the smaller bounds the step
            double q = -0.5 * (b - std::sqrt(disc));
            double r1 = q / a;
            double r2 = c0 / q;
            alpha = std::min(r1, r2);
        }
    }
    if (d0 < 0) alpha = std::min(alpha, u0 / (-d0));
    return alpha;
}

double cone_max_step(const SplitProgram& sp, const Vec& u, const Vec& du) {
    double alpha = kInf;
    for (const auto& blk : sp.blocks) {
        if (blk.soc) {
            alpha = std::min(alpha, soc_step(u[blk.off], u.segment(blk.off + 1, blk.dim - 1),
                                             du[blk.off], du.segment(blk.off + 1, blk.dim - 1)));
        } else {
            for (int i = 0; i < blk.dim; ++i) {
                double d = du[blk.off + i];
                if (d < 0) alpha = std::min(alpha, u[blk.off + i] / (-d));
            }
        }
    }
    return alpha;
}

// Jordan product u o v on the cone algebra (componentwise on NonNeg blocks,
// arrow product on second-order blocks).
Vec jordan_product(const SplitProgram& sp, const Vec& u, const Vec& v) {
    Vec out = Vec::Zero(sp.m);
    for (const auto& blk : sp.blocks) {
        if (blk.soc) {
            auto u1 = u.segment(blk.off + 1, blk.dim - 1);
            auto v1 = v.segment(blk.off + 1, blk.dim - 1);
            out[blk.off] = u.segment(blk.off, blk.dim).dot(v.segment(blk.off, blk.dim));
            out.segment(blk.off + 1, blk.dim - 1) = u[blk.off] * v1 + v[blk.off] * u1;
        } else {
            out.segment(blk.off, blk.dim) = u.segment(blk.off, blk.dim)
                                                .cwiseProduct(v.segment(blk.off, blk.dim));
        }
    }
    return out;
}

// Nesterov-Todd scaling: W z = W^-1 s = lambda, assembled dense per block.
struct Scaling {
    Mat W, Winv, ArrLam;
    Vec lambda;
    bool ok = false;
};

Scaling compute_scaling(const SplitProgram& sp, const Vec& s, const Vec& z) {
    Scaling sc;
    sc.W = Mat::Zero(sp.m, sp.m);
    sc.Winv = Mat::Zero(sp.m, sp.m);
    sc.ArrLam = Mat::Zero(sp.m, sp.m);
    sc.lambda = Vec::Zero(sp.m);
    for (const auto& blk : sp.blocks) {
        if (!blk.soc) {
            for (int i = 0; i < blk.dim; ++i) {
                int r = blk.off + i;
                if (s[r] <= 0 || z[r] <= 0) return sc;
                double w = std::sqrt(s[r] / z[r]);
                double lam = std::sqrt(s[r] * z[r]);
                sc.W(r, r) = w;
                sc.Winv(r, r) = 1.0 / w;
                sc.lambda[r] = lam;
                sc.ArrLam(r, r) = lam;
            }
        } else {
            int o = blk.off, d = blk.dim;
            Vec sb = s.segment(o, d), zb = z.segment(o, d);
            double ss = sb[0] * sb[0] - sb.tail(d - 1).squaredNorm();
            double zz = zb[0] * zb[0] - zb.tail(d - 1).squaredNorm();
            if (ss <= 0 || zz <= 0 || sb[0] <= 0 || zb[0] <= 0) return sc;
            double aa = std::sqrt(ss), bb = std::sqrt(zz);
            Vec sbar = sb / aa, zbar = zb / bb;
            double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
            Vec wbar(d);
            wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
            wbar.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2.0 * gamma);
            double eta = std::sqrt(aa / bb);
            // W = eta [[w0, w1'], [w1, I + w1 w1'/(1+w0)]], the symmetric square
            // root of eta^2 (2 wbar wbar' - J); W^-1 flips the sign of w1.
            Mat Wb(d, d), Wib(d, d);
            double w0 = wbar[0];
            Vec w1 = wbar.tail(d - 1);
            Wb(0, 0) = w0;
            Wb.block(0, 1, 1, d - 1) = w1.transpose();
            Wb.block(1, 0, d - 1, 1) = w1;
            Wb.block(1, 1, d - 1, d - 1) =
                Mat::Identity(d - 1, d - 1) + w1 * w1.transpose() / (1.0 + w0);
            Wib = Wb;
            Wib.block(0, 1, 1, d - 1) *= -1.0;
            Wib.block(1, 0, d - 1, 1) *= -1.0;
            sc.W.block(o, o, d, d) = eta * Wb;
            sc.Winv.block(o, o, d, d) = Wib / eta;
            Vec lam = eta * (Wb * zb);
            sc.lambda.segment(o, d) = lam;
            sc.ArrLam.block(o, o, d, d) = lam[0] * Mat::Identity(d, d);
            sc.ArrLam.block(o, o + 1, 1, d - 1) = lam.tail(d - 1).transpose();
            sc.ArrLam.block(o + 1, o, d - 1, 1) = lam.tail(d - 1);
        }
    }
    sc.ok = true;
    return sc;
}

}  // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIterations: return "max_iterations";
        case SolveStatus::NumericalProblem: return "numerical_problem";
    }
    return "unknown";
}

void ConeProgram::validate() const {
    const int n = num_vars(), r = num_rows();
    if (n < 1) throw ModelError("cone program needs at least one variable");
    if (r < 1) throw ModelError("cone program needs at least one row");
    if (A.rows() != r || A.cols() != n)
        throw ModelError("cone program matrix shape disagrees with c and b");
    int total = 0;
    for (const auto& blk : cones) {
        if (blk.dim < 1) throw ModelError("cone block with nonpositive dimension");
        total += blk.dim;
    }
    if (total != r) throw ModelError("cone blocks do not partition the rows");
    if (!c.allFinite() || !b.allFinite() || !A.allFinite())
        throw ModelError("cone program contains non-finite data");
}

SolveReport solve_cone_program(const ConeProgram& prog, const SolverOptions& opts) {
    prog.validate();
    SplitProgram sp = split_rows(prog);
    const int n = sp.n, p = sp.p, m = sp.m;
    const Vec e = cone_identity(sp);

    SolveReport rep;
    rep.tol_used = opts.tol;
    rep.x = Vec::Zero(n);
    rep.z = Vec::Zero(prog.num_rows());
    rep.s = Vec::Zero(prog.num_rows());

    // Starting point: primal part minimizes ||G x - h|| over Aeq x = beq, dual
    // part solves the analogous least-squares system; both slacks are shifted
    // into the cone interior if needed.
    Vec x = Vec::Zero(n), y = Vec::Zero(p), z = Vec::Zero(m), s = Vec::Zero(m);
    double tau = 1.0, kappa = 1.0;
    {
        const int n0 = n + p + m;
        Mat M0 = Mat::Zero(n0, n0);
        M0.block(0, n, n, p) = sp.Aeq.transpose();
        M0.block(0, n + p, n, m) = sp.G.transpose();
        M0.block(n, 0, p, n) = sp.Aeq;
        M0.block(n + p, 0, m, n) = sp.G;
        M0.block(n + p, n + p, m, m) = -Mat::Identity(m, m);
        Eigen::PartialPivLU<Mat> lu0(M0);
        Vec r1 = Vec::Zero(n0);
        r1.segment(n, p) = sp.beq;
        r1.segment(n + p, m) = sp.h;
        Vec u1 = lu0.solve(r1);
        Vec r2 = Vec::Zero(n0);
        r2.head(n) = -prog.c;
        Vec u2 = lu0.solve(r2);
        const double q1 = (M0 * u1 - r1).norm() / std::max(1.0, r1.norm());
        const double q2 = (M0 * u2 - r2).norm() / std::max(1.0, r2.norm());
        if (u1.allFinite() && u2.allFinite() && q1 < 1e-6 && q2 < 1e-6) {
            x = u1.head(n);
            s = -u1.segment(n + p, m);
            y = u2.segment(n, p);
            z = u2.segment(n + p, m);
        }
        double ts = -cone_min_eig(sp, s);
        if (!(ts < -1e-8 * std::max(1.0, s.norm()))) s += (1.0 + ts) * e;
        double tz = -cone_min_eig(sp, z);
        if (!(tz < -1e-8 * std::max(1.0, z.norm()))) z += (1.0 + tz) * e;
    }

    const double resx0 = std::max(1.0, prog.c.norm());
    const double resy0 = std::max(1.0, sp.beq.norm());
    const double resz0 = std::max(1.0, sp.h.norm());

    const int N = n + p + 2 * m + 2;
    const int ix = 0, iy = n, iz = n + p, is0 = n + p + m, itau = n + p + 2 * m,
              ikap = itau + 1;
    const int r1o = 0, r2o = n, r3o = n + p, r4o = n + p + m, r5o = n + p + m + 1,
              r6o = N - 1;

    // Rows R1-R4 of the Newton matrix never change between iterations.
    Mat Mbase = Mat::Zero(N, N);
    Mbase.block(r1o, iy, n, p) = sp.Aeq.transpose();
    Mbase.block(r1o, iz, n, m) = sp.G.transpose();
    Mbase.block(r1o, itau, n, 1) = prog.c;
    Mbase.block(r2o, ix, p, n) = sp.Aeq;
    Mbase.block(r2o, itau, p, 1) = -sp.beq;
    Mbase.block(r3o, ix, m, n) = sp.G;
    Mbase.block(r3o, is0, m, m) = Mat::Identity(m, m);
    Mbase.block(r3o, itau, m, 1) = -sp.h;
    Mbase.block(r4o, ix, 1, n) = prog.c.transpose();
    Mbase.block(r4o, iy, 1, p) = sp.beq.transpose();
    Mbase.block(r4o, iz, 1, m) = sp.h.transpose();
    Mbase(r4o, ikap) = 1.0;

    auto fill_report = [&](SolveStatus st, double pres, double dres, double gap, int it) {
        rep.status = st;
        rep.iterations = it;
        rep.primal_res = pres;
        rep.dual_res = dres;
        rep.gap = gap;
        if (tau > 0) {
            rep.x = x / tau;
            for (int i = 0; i < p; ++i) rep.z[sp.eq_rows[i]] = y[i] / tau;
            for (int i = 0; i < m; ++i) rep.z[sp.cone_rows[i]] = z[i] / tau;
            rep.s = prog.b - prog.A * rep.x;
            rep.objective = prog.c.dot(rep.x);
        }
    };

    double pres = kInf, dres = kInf, relgap = kInf;
    int iter = 0;
    for (;; ++iter) {
        Vec F1 = sp.Aeq.transpose() * y + sp.G.transpose() * z + prog.c * tau;
        Vec F2 = sp.Aeq * x - sp.beq * tau;
        Vec F3 = sp.G * x + s - sp.h * tau;
        double cx = prog.c.dot(x);
        double db = sp.beq.dot(y) + sp.h.dot(z);
        double F4 = cx + db + kappa;
        double stz = s.dot(z);

        pres = std::max(F2.norm() / resy0, F3.norm() / resz0) / tau;
        dres = F1.norm() / resx0 / tau;
        double pcost = cx / tau;
        double gap = stz / (tau * tau);
        relgap = gap / std::max(1.0, std::abs(pcost));

        if (pres <= opts.tol && dres <= opts.tol && relgap <= opts.tol) {
            fill_report(SolveStatus::Optimal, pres, dres, relgap, iter);
            return rep;
        }
        if (db < 0) {
            double pinf = (F1 - prog.c * tau).norm() / resx0 / (-db);
            if (pinf <= opts.tol) {
                rep.status = SolveStatus::Infeasible;
                rep.iterations = iter;
                rep.primal_res = pinf;
                rep.dual_res = pinf;
                rep.gap = std::numeric_limits<double>::quiet_NaN();
                rep.objective = std::numeric_limits<double>::quiet_NaN();
                rep.x = Vec::Zero(n);
                rep.s = Vec::Zero(prog.num_rows());
                for (int i = 0; i < p; ++i) rep.z[sp.eq_rows[i]] = y[i] / (-db);
                for (int i = 0; i < m; ++i) rep.z[sp.cone_rows[i]] = z[i] / (-db);
                return rep;
            }
        }
        if (cx < 0) {
            double dinf = std::max((sp.Aeq * x).norm() / resy0, (sp.G * x + s).norm() / resz0) /
                          (-cx);
            if (dinf <= opts.tol) {
                rep.status = SolveStatus::Unbounded;
                rep.iterations = iter;
                rep.primal_res = dinf;
                rep.dual_res = dinf;
                rep.gap = std::numeric_limits<double>::quiet_NaN();
                rep.objective = -kInf;
                rep.x = x / (-cx);
                rep.z = Vec::Zero(prog.num_rows());
                for (int i = 0; i < m; ++i) rep.s[sp.cone_rows[i]] = s[i] / (-cx);
                return rep;
            }
        }
        if (iter >= opts.max_iters) {
            fill_report(SolveStatus::MaxIterations, pres, dres, relgap, iter);
            return rep;
        }

        if (cone_min_eig(sp, s) <= 0 || cone_min_eig(sp, z) <= 0 || tau <= 0 || kappa <= 0) {
            fill_report(SolveStatus::NumericalProblem, pres, dres, relgap, iter);
            return rep;
        }
        Scaling sc = compute_scaling(sp, s, z);
        if (!sc.ok) {
            fill_report(SolveStatus::NumericalProblem, pres, dres, relgap, iter);
            return rep;
        }
        double mu = (stz + tau * kappa) / (sp.degree + 1);

        Mat M = Mbase;
        M.block(r5o, iz, m, m) = sc.ArrLam * sc.W;
        M.block(r5o, is0, m, m) = sc.ArrLam * sc.Winv;
        M(r6o, itau) = kappa;
        M(r6o, ikap) = tau;
        Eigen::PartialPivLU<Mat> lu(M);

        auto solve_refined = [&](const Vec& rhs) {
            Vec du = lu.solve(rhs);
            du += lu.solve(rhs - M * du);
            return du;
        };

        Vec rhs = Vec::Zero(N);
        rhs.segment(r1o, n) = -F1;
        rhs.segment(r2o, p) = -F2;
        rhs.segment(r3o, m) = -F3;
        rhs[r4o] = -F4;
        rhs.segment(r5o, m) = -jordan_product(sp, sc.lambda, sc.lambda);
        rhs[r6o] = -tau * kappa;
        Vec da = solve_refined(rhs);
        if (!da.allFinite()) {
            fill_report(SolveStatus::NumericalProblem, pres, dres, relgap, iter);
            return rep;
        }

        double alpha_aff = std::min({cone_max_step(sp, s, da.segment(is0, m)),
                                     cone_max_step(sp, z, da.segment(iz, m)),
                                     da[itau] < 0 ? tau / (-da[itau]) : kInf,
                                     da[ikap] < 0 ? kappa / (-da[ikap]) : kInf});
        double sigma = std::pow(1.0 - std::min(1.0, alpha_aff), 3);

        Vec corr = jordan_product(sp, sc.Winv * da.segment(is0, m), sc.W * da.segment(iz, m));
        rhs.segment(r1o, n) = -(1.0 - sigma) * F1;
        rhs.segment(r2o, p) = -(1.0 - sigma) * F2;
        rhs.segment(r3o, m) = -(1.0 - sigma) * F3;
        rhs[r4o] = -(1.0 - sigma) * F4;
        rhs.segment(r5o, m) =
            -jordan_product(sp, sc.lambda, sc.lambda) - corr + sigma * mu * e;
        rhs[r6o] = -tau * kappa - da[itau] * da[ikap] + sigma * mu;
        Vec dc = solve_refined(rhs);
        if (!dc.allFinite()) {
            fill_report(SolveStatus::NumericalProblem, pres, dres, relgap, iter);
            return rep;
        }

        double alpha_max = std::min({cone_max_step(sp, s, dc.segment(is0, m)),
                                     cone_max_step(sp, z, dc.segment(iz, m)),
                                     dc[itau] < 0 ? tau / (-dc[itau]) : kInf,
                                     dc[ikap] < 0 ? kappa / (-dc[ikap]) : kInf});
        double alpha = std::min(1.0, 0.99 * alpha_max);
        if (!(alpha > 1e-13)) {
            fill_report(SolveStatus::NumericalProblem, pres, dres, relgap, iter);
            return rep;
        }

        x += alpha * dc.segment(ix, n);
        y += alpha * dc.segment(iy, p);
        z += alpha * dc.segment(iz, m);
        s += alpha * dc.segment(is0, m);
        tau += alpha * dc[itau];
        kappa += alpha * dc[ikap];
    }
}

KktResiduals recompute_kkt(const ConeProgram& prog, const SolveReport& rep) {
    KktResiduals kk{kInf, kInf, kInf};
    if (rep.x.size() != prog.num_vars() || rep.z.size() != prog.num_rows()) return kk;
    Vec s = prog.b - prog.A * rep.x;
    double pviol2 = 0.0, zviol2 = 0.0;
    int row = 0;
    for (const auto& blk : prog.cones) {
        if (blk.kind == ConeKind::Zero) {
            pviol2 += s.segment(row, blk.dim).squaredNorm();
        } else if (blk.kind == ConeKind::SecondOrder && blk.dim > 1) {
            double sv = s.segment(row + 1, blk.dim - 1).norm() - s[row];
            if (sv > 0) pviol2 += sv * sv;
            double zv = rep.z.segment(row + 1, blk.dim - 1).norm() - rep.z[row];
            if (zv > 0) zviol2 += zv * zv;
        } else {
            for (int i = 0; i < blk.dim; ++i) {
                double sv = -s[row + i];
                if (sv > 0) pviol2 += sv * sv;
                double zv = -rep.z[row + i];
                if (zv > 0) zviol2 += zv * zv;
            }
        }
        row += blk.dim;
    }
    double cn = std::max(1.0, prog.c.norm());
    kk.primal = std::sqrt(pviol2) / std::max(1.0, prog.b.norm());
    kk.dual = std::max((prog.c + prog.A.transpose() * rep.z).norm() / cn,
                       std::sqrt(zviol2) / cn);
    kk.gap = std::abs(rep.z.dot(s)) / std::max(1.0, std::abs(prog.c.dot(rep.x)));
    return kk;
}

void dump_cone_program(std::ostream& os, const ConeProgram& prog) {
    char buf[64];
    os << "vars " << prog.num_vars() << " rows " << prog.num_rows() << "\n";
    os << "cones";
    for (const auto& blk : prog.cones) {
        const char* k = blk.kind == ConeKind::Zero ? "zero"
                        : blk.kind == ConeKind::NonNeg ? "nonneg"
                                                       : "soc";
        os << " " << k << ":" << blk.dim;
    }
    os << "\n";
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    os << "c";
    for (int j = 0; j < prog.num_vars(); ++j) {
        os << " ";
        put(prog.c[j]);
    }
    os << "\nb";
    for (int i = 0; i < prog.num_rows(); ++i) {
        os << " ";
        put(prog.b[i]);
    }
    os << "\n";
    for (int i = 0; i < prog.num_rows(); ++i)
        for (int j = 0; j < prog.num_vars(); ++j)
            if (prog.A(i, j) != 0) {
                os << "A " << i << " " << j << " ";
                put(prog.A(i, j));
                os << "\n";
            }
}

}  // namespace dynbf
