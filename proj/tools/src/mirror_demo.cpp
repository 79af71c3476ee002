// Mirror design: optimize a neural surface z = mlp(x, y) so rays from a point
// source at (-1.5, 0, -1.5) reflect onto the target (1, 0, -1.5) on the
// detector plane z = -1.5. Each iteration traces every ray through a root
// find for the surface intersection, reflects it off the local normal, and
// minimizes the summed squared deviation at the plane with Adam.

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
#include "diffnum/ops.hpp"
#include "diffnum/optimize/adam.hpp"

using namespace diffnum;
using demos::CsvWriter;
using demos::trace_ray;

namespace {

struct Config {
  int iters = 500;
  double lr = 3e-4;
  std::uint64_t seed = 0;
  std::string out = ".";
  int rays = 25;
  double tol = 1e-10;  // root-find tolerance for the surface intersection
  double init_scale = 0.25;
  std::vector<std::int64_t> hidden{16, 16};
};

// Rays aim at a centered grid over the mirror patch around the origin; the
// grid is the smallest square holding `count` aim points, trimmed row-major.
std::vector<Tensor> make_rays(const Tensor& source, int count) {
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  const double extent = 0.3;
  std::vector<Tensor> dirs;
  dirs.reserve(static_cast<size_t>(count));
  const auto s = source.data();
  for (int k = 0; k < count; ++k) {
    const int row = k / side, col = k % side;
    const double ax = side == 1 ? 0.0 : -extent + 2.0 * extent * col / (side - 1);
    const double ay = side == 1 ? 0.0 : -extent + 2.0 * extent * row / (side - 1);
    const double vx = ax - s[0], vy = ay - s[1], vz = 0.0 - s[2];
    const double norm = std::sqrt(vx * vx + vy * vy + vz * vz);
    dirs.push_back(Tensor::from_vector({3}, {vx / norm, vy / norm, vz / norm}));
  }
  return dirs;
}

int run(const Config& cfg) {
  const Tensor source = Tensor::from_vector({3}, {-1.5, 0.0, -1.5});
  const Tensor target = Tensor::from_vector({3}, {1.0, 0.0, -1.5});
  const double plane_z = -1.5;

  std::vector<std::int64_t> sizes{2};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  demos::Mlp net = demos::make_mlp(sizes, cfg.seed);
  // Damp the output layer so the initial surface hugs z = 0 and every ray
  // starts with a findable intersection.
  net.params[net.params.size() - 2] =
      mul(net.params[net.params.size() - 2], cfg.init_scale).detach();

  std::vector<Tensor> theta = net.params;
  std::vector<optimize::AdamState> states(theta.size());
  const std::vector<Tensor> dirs = make_rays(source, cfg.rays);
  SolverConfig rootcfg{.tol = cfg.tol, .max_iter = 100};

  CsvWriter loss_csv(cfg.out + "/loss.csv", {"iteration", "loss"});
  if (!loss_csv.ok()) {
    std::cerr << "error: cannot write " << cfg.out << "/loss.csv\n";
    return 2;
  }

  double first_loss = 0.0, last_loss = 0.0;
  for (int it = 0; it < cfg.iters; ++it) {
    std::vector<Tensor> tl(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) tl[i] = theta[i].leaf();
    Tensor loss = Tensor::scalar(0.0);
    int skipped = 0;
    std::string first_skip;
    for (const Tensor& d : dirs) {
      try {
        loss = add(loss, trace_ray(tl, source, d, target, plane_z, rootcfg));
      } catch (const SolverError& e) {
        if (skipped == 0) first_skip = e.what();
        ++skipped;
      }
    }
    if (skipped == static_cast<int>(dirs.size())) {
      std::cerr << "error: iteration " << it << " traced no rays (" << first_skip << ")\n";
      return 1;
    }
    if (skipped > 0)
      std::cerr << "warning: iteration " << it << " skipped " << skipped << " rays ("
                << first_skip << ")\n";
    auto gs = grad(loss, tl);
    for (size_t i = 0; i < theta.size(); ++i)
      theta[i] = optimize::adam_step(theta[i], gs[i], states[i], cfg.lr);
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

  // Final traces with the trained surface, plain values only.
  CsvWriter rays_csv(cfg.out + "/rays.csv",
                     {"ray", "status", "source_x", "source_y", "source_z", "mirror_x", "mirror_y",
                      "mirror_z", "plane_x", "plane_y", "plane_z"});
  NoGradGuard ng;
  const auto s = source.data();
  for (size_t r = 0; r < dirs.size(); ++r) {
    std::array<double, 6> pts{};
    double status = 1.0;
    try {
      (void)trace_ray(theta, source, dirs[r], target, plane_z, rootcfg, &pts);
    } catch (const SolverError&) {
      status = 0.0;
      pts = {};
    }
    const double row[11] = {static_cast<double>(r), status, s[0], s[1], s[2],
                            pts[0],                 pts[1], pts[2], pts[3], pts[4],
                            pts[5]};
    rays_csv.row(row);
  }

  std::cout << "mirror_demo: " << cfg.iters << " iterations, " << cfg.rays << " rays\n"
            << "  initial loss " << first_loss << "\n"
            << "  final   loss " << last_loss << " (ratio "
            << (first_loss > 0 ? last_loss / first_loss : 0.0) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural mirror design via differentiable ray tracing"};
  Config cfg;
  app.add_option("--iters", cfg.iters, "optimization iterations")->capture_default_str();
  app.add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--seed", cfg.seed, "surface init seed")->capture_default_str();
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_option("--rays", cfg.rays, "number of traced rays")->capture_default_str();
  app.add_option("--tol", cfg.tol, "surface intersection tolerance")->capture_default_str();
  app.add_option("--init-scale", cfg.init_scale, "output layer damping at init")
      ->capture_default_str();
  app.add_option("--hidden", cfg.hidden, "hidden layer widths")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (cfg.iters < 1 || cfg.rays < 1 || !(cfg.lr > 0) || !(cfg.tol > 0) ||
      !(cfg.init_scale > 0) || cfg.hidden.empty()) {
    std::cerr << "error: iters, rays, lr, tol, init-scale, and hidden widths must be positive\n";
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
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
