#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoseg/config.hpp"
#include "geoseg/dualcut.hpp"
#include "geoseg/eval.hpp"
#include "geoseg/export.hpp"
#include "geoseg/io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kParameter = 2;
constexpr int kTopology = 3;
constexpr int kInternal = 4;

std::optional<geoseg::Point> parse_seed(const std::string& s) {
  std::istringstream in(s);
  int x = 0, y = 0;
  char comma = 0;
  if (!(in >> x >> comma >> y) || comma != ',' || !in.eof()) return std::nullopt;
  return geoseg::Point{x, y};
}

int run(int argc, char** argv) {
  CLI::App app{"Closed-contour segmentation from a landmark point"};
  std::string image_path, seed_text, scribble_path, barrier_path, gt_path, config_path;
  std::string out_dir = ".";
  std::string metric;
  std::optional<double> mu, alpha, lambda, beta, T, sigma;
  std::optional<int> ntheta;
  bool as_json = false;
  app.add_option("--image", image_path, "input image (PGM or PNG)")->required();
  app.add_option("--seed", seed_text, "landmark point X,Y");
  app.add_option("--scribble", scribble_path, "foreground scribble, JSON [[x,y],...]");
  app.add_option("--barrier", barrier_path, "barrier scribble(s), JSON polyline or list of polylines");
  app.add_option("--metric", metric, "aq | riem | rsf | elastica")
      ->check(CLI::IsMember({"aq", "riem", "rsf", "elastica"}));
  app.add_option("--mu", mu, "region term weight");
  app.add_option("--alpha", alpha, "anisotropy strength");
  app.add_option("--lambda", lambda, "asymmetry (signed)");
  app.add_option("--beta", beta, "curvature weight");
  app.add_option("--T", T, "initial-shape threshold");
  app.add_option("--sigma", sigma, "Gaussian scale");
  app.add_option("--ntheta", ntheta, "number of orientations");
  app.add_option("--gt", gt_path, "ground-truth mask for a Jaccard CSV");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--config", config_path, "config file (key=value or JSON)");
  app.add_flag("--json", as_json, "print a JSON summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParameter;
  }
  if (seed_text.empty() && scribble_path.empty()) {
    std::cerr << "error: --seed X,Y (or --scribble FILE) is required\n\n" << app.help();
    return kParameter;
  }

  try {
    geoseg::DualCutConfig cfg;
    if (!config_path.empty()) cfg = geoseg::load_config(config_path);
    nlohmann::json over = nlohmann::json::object();
    if (!metric.empty()) over["metric"] = metric;
    if (mu) over["mu"] = *mu;
    if (alpha) over["alpha"] = *alpha;
    if (lambda) over["lambda"] = *lambda;
    if (beta) over["beta"] = *beta;
    if (T) over["T"] = *T;
    if (sigma) over["sigma"] = *sigma;
    if (ntheta) over["ntheta"] = *ntheta;
    cfg = geoseg::config_from_json(over, cfg);

    const geoseg::Image img = geoseg::load_image(image_path);
    geoseg::SeedInput in;
    if (!seed_text.empty()) {
      in.point = parse_seed(seed_text);
      if (!in.point) throw geoseg::ParameterError("--seed must look like X,Y");
      if (!img.geometry().contains(*in.point))
        throw geoseg::ParameterError("seed " + seed_text + " lies outside the " + std::to_string(img.width()) + "x" +
                                     std::to_string(img.height()) + " image");
    } else {
      in.scribble = geoseg::polyline_from_json(geoseg::load_json(scribble_path));
    }
    if (!barrier_path.empty()) in.barriers = geoseg::polylines_from_json(geoseg::load_json(barrier_path));

    const geoseg::SegmentationResult r = geoseg::segment(img, in, cfg);

    const std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    geoseg::save_contour(r.contour, out / "contour.json");
    geoseg::save_mask(r.region, out / "region.pgm");
    geoseg::save_mask(r.theta_z, out / "theta_z.pgm");
    geoseg::save_mask(r.A, out / "A.pgm");
    geoseg::save_float_grid(r.psi, out / "psi.f32");
    for (const char* name : {"gq.json", "a_b.json"}) {
      const auto blob = geoseg::export_field(r, name);
      std::ofstream(out / name, std::ios::binary) << blob->body << '\n';
    }

    nlohmann::json summary = geoseg::result_summary(r);
    summary.erase("stage_ms");
    if (!gt_path.empty()) {
      const geoseg::RegionMask gt = geoseg::load_mask(gt_path);
      const double j = geoseg::jaccard(r.region, gt);
      std::ofstream csv(out / "jaccard.csv");
      csv.precision(17);
      csv << "image,seed_x,seed_y,metric,jaccard\n"
          << image_path << ',' << r.z.x << ',' << r.z.y << ',' << geoseg::to_string(cfg.metric) << ',' << j << '\n';
      summary["jaccard"] = j;
    }
    if (as_json) std::cout << summary.dump(2) << '\n';
    return kOk;
  } catch (const geoseg::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kParameter;
  } catch (const geoseg::FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kParameter;
  } catch (const geoseg::IoError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kParameter;
  } catch (const geoseg::TopologyError& e) {
    std::cerr << "topology error: " << e.what() << '\n';
    return kTopology;
  } catch (const geoseg::InitializationError& e) {
    std::cerr << "initialization error: " << e.what() << '\n';
    return kTopology;
  } catch (const geoseg::DegenerateRegionError& e) {
    std::cerr << "initialization error: " << e.what() << '\n';
    return kTopology;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
