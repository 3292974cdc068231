#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Dense>

#include "tdlab/activations.hpp"
#include "tdlab/errors.hpp"

namespace tdlab {

namespace {

constexpr double kSupport = 12.0;

// Symmetric tridiagonal Jacobi matrix -> (nodes, first eigenvector components squared).
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0,
                  std::vector<double>& x, std::vector<double>& w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    const auto n = diag.size();
    x.resize(n);
    w.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        w[i] = mu0 * v * v;
    }
}

std::pair<std::vector<double>, std::vector<double>> legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n), e(n - 1);
    for (int k = 1; k < n; ++k) e(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    std::vector<double> x, w;
    golub_welsch(d, e, 2.0, x, w);
    // exact symmetry
    for (int i = 0; i < n / 2; ++i) {
        double a = 0.5 * (x[n - 1 - i] - x[i]);
        x[i] = -a;
        x[n - 1 - i] = a;
        double b = 0.5 * (w[i] + w[n - 1 - i]);
        w[i] = w[n - 1 - i] = b;
    }
    if (n % 2) x[n / 2] = 0.0;
    return cache[n] = {x, w};
}

}  // namespace

double QuadratureRule::expect(const ScalarFn& f) const {
    // compensated sum; tails contribute ~1e-30 terms
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double y = weights[i] * f(nodes[i]) - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

QuadratureRule gauss_hermite_rule(int n) {
    if (n < 2) throw InvalidParams("gauss_hermite_rule needs n >= 2");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n), e(n - 1);
    for (int k = 1; k < n; ++k) e(k - 1) = std::sqrt(double(k));
    QuadratureRule r;
    golub_welsch(d, e, 1.0, r.nodes, r.weights);
    for (int i = 0; i < n / 2; ++i) {
        double a = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
        r.nodes[i] = -a;
        r.nodes[n - 1 - i] = a;
        double b = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
        r.weights[i] = r.weights[n - 1 - i] = b;
    }
    if (n % 2) r.nodes[n / 2] = 0.0;
    double s = 0.0;
    for (double w : r.weights) s += w;
    for (double& w : r.weights) w /= s;
    return r;
}

QuadratureRule gaussian_panel_rule(int n_per_panel, const std::vector<double>& breaks) {
    if (n_per_panel < 2) throw InvalidParams("gaussian_panel_rule needs n >= 2");
    std::vector<double> cuts;
    for (int k = -int(kSupport); k <= int(kSupport); ++k) cuts.push_back(k);
    for (double b : breaks)
        if (std::abs(b) < kSupport) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               cuts.end());

    auto [x, w] = legendre(n_per_panel);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    QuadratureRule r;
    r.nodes.reserve(cuts.size() * n_per_panel);
    r.weights.reserve(cuts.size() * n_per_panel);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        double a = cuts[p], b = cuts[p + 1];
        double h = 0.5 * (b - a), c = 0.5 * (a + b);
        for (int i = 0; i < n_per_panel; ++i) {
            double t = c + h * x[i];
            r.nodes.push_back(t);
            r.weights.push_back(h * w[i] * norm * std::exp(-0.5 * t * t));
        }
    }
    return r;
}

}  // namespace tdlab
