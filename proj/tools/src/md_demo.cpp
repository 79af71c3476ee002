// Molecular dynamics shaping: particles interact through a softened pairwise
// attraction and drift for one time unit; the trainable initial velocities
// are optimized with Adam so the final positions land on a target pattern
// (square or circle outline, or points from a CSV file). Gradients flow
// through the full trajectory via the continuous adjoint of the integrator.

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "demo_common.hpp"
#include "diffnum/autograd.hpp"
#include "diffnum/errors.hpp"
#include "diffnum/integrate/solve_ivp.hpp"
#include "diffnum/ops.hpp"
#include "diffnum/optimize/adam.hpp"
#include "diffnum/rng.hpp"

using namespace diffnum;
using demos::CsvWriter;

namespace {

struct Config {
  int iters = 2000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string out = ".";
  int particles = 8;
  std::string target_csv;
  std::string shape = "square";
  double tol = 1e-6;  // integrator relative tolerance
  double softening = 0.1;
};

// Starting layout: a centered grid with 0.5 spacing, filled row-major. A
// seeded jitter breaks the grid's mirror symmetries — a perfectly symmetric
// cold start collapses into exact head-on collisions, where the unit vector
// in the force law is discontinuous and the integrator rightly gives up.
std::vector<double> grid_positions(int n, std::uint64_t seed) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;
  Rng rng(seed);
  std::vector<double> p;
  p.reserve(static_cast<size_t>(2 * n));
  for (int k = 0; k < n; ++k) {
    const int r = k / cols, c = k % cols;
    p.push_back(0.5 * (c - 0.5 * (cols - 1)) + rng.uniform(-0.05, 0.05));
    p.push_back(0.5 * (r - 0.5 * (rows - 1)) + rng.uniform(-0.05, 0.05));
  }
  return p;
}

// Initial velocity guess: a gentle rigid rotation about the cloud's center.
// The trained variable starts here; pure free fall from rest funnels every
// particle through the center at once.
std::vector<double> spin_velocities(const std::vector<double>& p, double omega) {
  const int n = static_cast<int>(p.size() / 2);
  double cx = 0.0, cy = 0.0;
  for (int k = 0; k < n; ++k) {
    cx += p[2 * k];
    cy += p[2 * k + 1];
  }
  cx /= n;
  cy /= n;
  std::vector<double> v(p.size());
  for (int k = 0; k < n; ++k) {
    v[2 * k] = -omega * (p[2 * k + 1] - cy);
    v[2 * k + 1] = omega * (p[2 * k] - cx);
  }
  return v;
}

// Target patterns: each particle is sent to the outline point along its own
// bearing from the cloud center, so trajectories fan outward instead of
// crossing through the middle.
std::vector<double> shape_target(const std::string& shape, const std::vector<double>& p0) {
  const int n = static_cast<int>(p0.size() / 2);
  double cx = 0.0, cy = 0.0;
  for (int k = 0; k < n; ++k) {
    cx += p0[2 * k];
    cy += p0[2 * k + 1];
  }
  cx /= n;
  cy /= n;
  std::vector<double> t;
  t.reserve(p0.size());
  for (int k = 0; k < n; ++k) {
    const double phi = std::atan2(p0[2 * k + 1] - cy, p0[2 * k] - cx);
    double cph = std::cos(phi), sph = std::sin(phi);
    // Unit circle, or the ray's exit through the square [-1, 1]^2.
    const double r =
        shape == "circle" ? 1.0 : 1.0 / std::max(std::abs(cph), std::abs(sph));
    t.push_back(r * cph);
    t.push_back(r * sph);
  }
  return t;
}

int run(const Config& cfg) {
  const int n = cfg.particles;
  const std::vector<double> p0_flat = grid_positions(n, cfg.seed);
  std::vector<double> target_flat;
  if (!cfg.target_csv.empty()) {
    const auto pts = demos::read_xy_csv(cfg.target_csv);
    if (static_cast<int>(pts.size()) != n) {
      std::cerr << "error: target file holds " << pts.size() << " points, expected " << n << "\n";
      return 2;
    }
    for (const auto& p : pts) {
      target_flat.push_back(p[0]);
      target_flat.push_back(p[1]);
    }
  } else {
    target_flat = shape_target(cfg.shape, p0_flat);
  }

  // Start the trainable velocities at the free-flight solution (reach the
  // target in unit time if the forces were absent); the optimizer then only
  // has to learn the correction for the mutual attraction.
  std::vector<double> v0_flat(p0_flat.size());
  for (size_t i = 0; i < v0_flat.size(); ++i) v0_flat[i] = target_flat[i] - p0_flat[i];

  const Tensor p0 = Tensor::from_vector({2 * n}, p0_flat);
  const Tensor target = Tensor::from_vector({2 * n}, std::move(target_flat));
  const Tensor a = Tensor::scalar(cfg.softening);
  const Tensor t0 = Tensor::scalar(0.0), t1 = Tensor::scalar(1.0);
  SolverConfig ivpcfg{.rtol = cfg.tol, .atol = cfg.tol * 1e-2, .max_steps = 100000};

  // State layout: y = [positions (2n), velocities (2n)].
  TensorFn dynamics = [n, a](std::span<const Tensor> in) -> Tensor {
    const Tensor& y = in[1];
    Tensor pos = reshape(slice(y, 0, 0, 2 * n), {n, 2});
    Tensor vel = slice(y, 0, 2 * n, 4 * n);
    Tensor acc = reshape(demos::md_force(pos, a), {2 * n});
    return concat({vel, acc}, 0);
  };

  CsvWriter loss_csv(cfg.out + "/loss.csv", {"iteration", "loss"});
  if (!loss_csv.ok()) {
    std::cerr << "error: cannot write " << cfg.out << "/loss.csv\n";
    return 2;
  }

  Tensor v0 = Tensor::from_vector(
      {2 * n}, spin_velocities(std::vector<double>(p0.data().begin(), p0.data().end()), 0.5));
  optimize::AdamState state;
  double first_loss = 0.0, last_loss = 0.0;
  for (int it = 0; it < cfg.iters; ++it) {
    Tensor v0l = v0.leaf();
    Tensor y0 = concat({p0, v0l}, 0);
    Tensor y1 = integrate::solve_ivp(dynamics, y0, t0, t1, {}, ivpcfg);
    Tensor dev = sub(slice(y1, 0, 0, 2 * n), target);
    Tensor loss = sum(mul(dev, dev));
    Tensor g = grad1(loss, v0l);
    v0 = optimize::adam_step(v0, g, state, cfg.lr);
    const double lv = loss.item();
    if (!std::isfinite(lv)) {
      std::cerr << "error: loss diverged at iteration " << it << "\n";
      return 1;
    }
    if (it == 0) first_loss = lv;
    last_loss = lv;
    const double row[2] = {static_cast<double>(it), lv};
    loss_csv.row(row);
  }

  // Snapshot the trained trajectory and check momentum conservation.
  NoGradGuard ng;
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  Tensor y0 = concat({p0, v0}, 0);
  auto sol = integrate::solve_ivp_at(dynamics, y0, t0, t1, times, {}, ivpcfg);

  CsvWriter snap_csv(cfg.out + "/snapshots.csv", {"time", "particle", "x", "y"});
  for (size_t s = 0; s < sol.snapshots.size(); ++s) {
    const auto ys = sol.snapshots[s].data();
    for (int k = 0; k < n; ++k) {
      const double row[4] = {times[s], static_cast<double>(k), ys[2 * k], ys[2 * k + 1]};
      snap_csv.row(row);
    }
  }

  double mom0[2] = {0.0, 0.0}, mom1[2] = {0.0, 0.0};
  const auto v0d = v0.data();
  const auto y1d = sol.y1.data();
  for (int k = 0; k < n; ++k)
    for (int c = 0; c < 2; ++c) {
      mom0[c] += v0d[2 * k + c];
      mom1[c] += y1d[2 * n + 2 * k + c];
    }
  const double drift = std::max(std::abs(mom1[0] - mom0[0]), std::abs(mom1[1] - mom0[1]));
  if (drift > 1e-6) {
    std::cerr << "error: momentum drift " << drift << " exceeds 1e-6\n";
    return 1;
  }

  std::cout << "md_demo: " << cfg.iters << " iterations, " << n << " particles\n"
            << "  initial loss " << first_loss << "\n"
            << "  final   loss " << last_loss << " (reduction "
            << (first_loss > 0 ? 100.0 * (1.0 - last_loss / first_loss) : 0.0) << "%)\n"
            << "  momentum drift " << drift << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Velocity shaping for interacting particles"};
  Config cfg;
  app.add_option("--iters", cfg.iters, "optimization iterations")->capture_default_str();
  app.add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--seed", cfg.seed, "starting-layout jitter seed")->capture_default_str();
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_option("--particles", cfg.particles, "number of particles")->capture_default_str();
  app.add_option("--target", cfg.target_csv, "CSV of target points (x,y per row)");
  app.add_option("--shape", cfg.shape, "built-in target outline")
      ->check(CLI::IsMember({"square", "circle"}))
      ->capture_default_str();
  app.add_option("--tol", cfg.tol, "integrator relative tolerance")->capture_default_str();
  app.add_option("--softening", cfg.softening, "force softening constant")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (cfg.iters < 1 || cfg.particles < 1 || !(cfg.lr > 0) || !(cfg.tol > 0) ||
      !(cfg.softening > 0)) {
    std::cerr << "error: iters, particles, lr, tol, and softening must be positive\n";
    return 2;
  }
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << cfg.out << ": " << ec.message()
              << "\n";
    return 2;
  }
  try {
    return run(cfg);
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
