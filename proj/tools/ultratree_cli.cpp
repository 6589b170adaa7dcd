#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ultratree/ultratree.hpp"

using namespace ultratree;

namespace {

struct Settings {
  std::string space = "tau";
  std::string format = "newick";
  int precision = kDefaultPrecision;
  std::uint64_t seed = 0;
  std::size_t samples = 10'000;
  std::size_t iters = 10'000;
  std::optional<std::size_t> max_hops;
  std::string interval_dist = "exp";
  std::size_t jobs = 0;
  std::size_t points = 0;
  std::string mode = "geodesic";
  bool count_only = false;
  std::size_t n = 4;
  std::string to = "ranked";
  bool random_order = false;
  bool include_same_topology = false;
  std::vector<std::string> inputs;
};

const std::map<std::string, Space> kSpaces{{"tau", Space::tau}, {"t", Space::t}, {"bhv", Space::bhv}};
const std::map<std::string, TreeFormat> kFormats{{"newick", TreeFormat::newick}, {"ranked", TreeFormat::ranked}};
const std::map<std::string, IntervalDist> kDists{{"exp", IntervalDist::exponential}, {"unif", IntervalDist::uniform}};

class Cli {
 public:
  explicit Cli(const Settings& s) : s_(s) {}

  std::string num(double x) const { return detail::format_number(x, s_.precision); }
  std::string tree(const TTree& t) const { return write_tree(t, kFormats.at(s_.format), s_.precision); }
  Space space() const { return kSpaces.at(s_.space); }

  std::vector<TTree> read(const std::string& path) const {
    const TreeFormat f = kFormats.at(s_.format);
    if (path == "-") return read_trees(std::cin, f);
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
    return read_trees(in, f);
  }

  std::vector<TTree> read_all() const {
    std::vector<TTree> out;
    for (const auto& p : s_.inputs) {
      auto trees = read(p);
      out.insert(out.end(), trees.begin(), trees.end());
    }
    if (out.empty()) throw Error(ErrorKind::EmptyInput, "no trees in input");
    return out;
  }

  /// First tree of each of two files, or the first two trees of one file.
  std::pair<TTree, TTree> read_pair() const {
    if (s_.inputs.size() == 2) {
      auto a = read(s_.inputs[0]), b = read(s_.inputs[1]);
      if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyInput, "each input must hold a tree");
      return {a.front(), b.front()};
    }
    auto all = read_all();
    if (all.size() < 2) throw Error(ErrorKind::EmptyInput, "need two trees");
    return {all[0], all[1]};
  }

  int validate() const {
    for (const auto& t : read_all())
      std::cout << "ok " << t.taxon_count() << ' ' << write_ranked(t, s_.precision) << '\n';
    return 0;
  }

  int distance() const {
    if (s_.mode == "path") {
      auto path = read_all();
      std::cout << num(path_length(path)) << '\n';
      return 0;
    }
    auto [a, b] = read_pair();
    if (s_.mode == "cone") {
      auto c = cone_path(a, b);
      std::cout << num(c.length) << "\n# star_height " << num(c.star_height) << '\n';
      return 0;
    }
    switch (space()) {
      case Space::tau: std::cout << num(tau_distance(to_tau(a), to_tau(b))) << '\n'; break;
      case Space::bhv: std::cout << num(bhv_distance(to_tau(a), to_tau(b))) << '\n'; break;
      case Space::t: std::cout << num(t_distance(a, b, s_.max_hops)) << '\n'; break;
    }
    return 0;
  }

  int geodesic() const {
    auto [a, b] = read_pair();
    std::vector<TTree> waypoints, points;
    double length = 0.0;
    auto sample_points = [&](const auto& path, auto convert) {
      for (std::size_t k = 0; k < s_.points; ++k) {
        const double s = s_.points == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(s_.points - 1);
        points.push_back(convert(point_at(path, s)));
      }
    };
    if (space() == Space::t) {
      auto path = s_.mode == "cone" ? cone_geodesic_path(a, b) : t_geodesic(a, b, s_.max_hops);
      length = path.length();
      waypoints = path.waypoints;
      sample_points(path, [](const TTree& x) { return x; });
    } else if (space() == Space::tau) {
      auto path = tau_geodesic(to_tau(a), to_tau(b));
      length = path.length();
      for (const auto& w : path.waypoints) waypoints.push_back(to_t(w));
      sample_points(path, [](const TauTree& x) { return to_t(x); });
    } else {
      throw Error(ErrorKind::InvalidArgument, "geodesic paths are available for --space tau and t");
    }
    std::cout << "# length " << num(length) << '\n';
    for (const auto& w : waypoints) std::cout << tree(w) << '\n';
    if (!points.empty()) {
      std::cout << "# points " << points.size() << '\n';
      for (const auto& p : points) std::cout << tree(p) << '\n';
    }
    return 0;
  }

  MeanResult mean_of(const std::vector<TauTree>& trees) const {
    MeanOptions opt;
    opt.iterations = s_.iters;
    opt.random_order = s_.random_order;
    opt.seed = s_.seed;
    return frechet_mean(trees, opt);
  }

  std::vector<TauTree> tau_inputs() const {
    if (space() != Space::tau) throw Error(ErrorKind::InvalidArgument, "means and variances are defined for --space tau only");
    std::vector<TauTree> out;
    for (const auto& t : read_all()) out.push_back(to_tau(t));
    return out;
  }

  int mean() const {
    auto r = mean_of(tau_inputs());
    std::cout << tree(to_t(r.mean)) << "\n# variance " << num(r.variance) << "\n# iterations " << r.iterations
              << "\n# final_step " << num(r.final_step) << '\n';
    return 0;
  }

  int variance() const { std::cout << num(mean_of(tau_inputs()).variance) << '\n'; return 0; }

  int mu() const {
    MuOptions opt;
    opt.samples = s_.samples;
    opt.seed = s_.seed;
    opt.interval_dist = kDists.at(s_.interval_dist);
    opt.jobs = s_.jobs;
    opt.include_same_topology = s_.include_same_topology;
    auto est = estimate_mu(s_.n, space(), opt);
    std::cout << num(est.estimate) << "\n# half_width " << num(est.half_width) << "\n# samples " << est.samples
              << "\n# cone_pairs " << est.cone_pairs << "\n# redrawn_same_topology " << est.skipped_same_topology
              << '\n';
    return 0;
  }

  int enumerate() const {
    if (s_.n < 2) throw Error(ErrorKind::FewerThanTwoTaxa, "need at least two taxa");
    if (s_.count_only) {
      std::cout << count_ranked_topologies(s_.n) << '\n';
      return 0;
    }
    for (const auto& c : enumerate_ranked_topologies(numbered_taxa(s_.n))) std::cout << format_ranked_topology(c) << '\n';
    return 0;
  }

  int neighbors() const {
    for (const auto& t : read_all()) {
      std::cout << "# " << format_ranked_topology(t.topology()) << '\n';
      for (const auto& f : facet_neighbors(t.topology()))
        for (const auto& c : f.chains) std::cout << f.coordinate << ' ' << format_ranked_topology(c) << '\n';
    }
    return 0;
  }

  int sample() const {
    if (s_.n < 2) throw Error(ErrorKind::FewerThanTwoTaxa, "need at least two taxa");
    auto taxa = numbered_taxa(s_.n);
    std::mt19937_64 rng(s_.seed);
    for (std::size_t i = 0; i < s_.samples; ++i) std::cout << tree(to_t(sample_tree(taxa, rng, kDists.at(s_.interval_dist)))) << '\n';
    return 0;
  }

  int convert() const {
    for (const auto& t : read_all()) std::cout << write_tree(t, kFormats.at(s_.to), s_.precision) << '\n';
    return 0;
  }

 private:
  const Settings& s_;
};

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"Ranked ultrametric tree spaces: tau-, t- and BHV-geodesics, means and cone-path statistics"};
  app.require_subcommand(1, 1);

  auto space_opt = [&](CLI::App* c) {
    c->add_option("--space", s.space, "tree space: tau, t or bhv")->check(CLI::IsMember({"tau", "t", "bhv"}))->capture_default_str();
  };
  auto format_opt = [&](CLI::App* c) {
    c->add_option("--format", s.format, "input/output tree format: newick or ranked")
        ->check(CLI::IsMember({"newick", "ranked"}))
        ->capture_default_str();
    c->add_option("--precision", s.precision, "significant digits in numeric output")
        ->check(CLI::Range(1, 17))
        ->capture_default_str();
  };
  auto inputs_opt = [&](CLI::App* c, std::size_t min) {
    c->add_option("inputs", s.inputs, "tree files ('-' for stdin)")->expected(static_cast<int>(min), -1);
  };
  auto seed_opt = [&](CLI::App* c) { c->add_option("--seed", s.seed, "random seed")->capture_default_str(); };
  auto hops_opt = [&](CLI::App* c) {
    c->add_option("--max-hops", s.max_hops, "t-space: longest simplex sequence searched (default 6 for n <= 4, else 8)");
  };
  auto dist_opt = [&](CLI::App* c) {
    c->add_option("--interval-dist", s.interval_dist, "sampled interval lengths: exp or unif")
        ->check(CLI::IsMember({"exp", "unif"}))
        ->capture_default_str();
  };
  auto n_opt = [&](CLI::App* c) { c->add_option("--n", s.n, "number of taxa")->capture_default_str(); };
  auto mean_opts = [&](CLI::App* c) {
    c->add_option("--iters", s.iters, "inductive-mean iterations")->capture_default_str();
    c->add_flag("--random-order", s.random_order, "visit samples in seeded random order instead of cyclically");
    seed_opt(c);
  };

  auto* validate = app.add_subcommand("validate", "parse trees and print their ranked form");
  format_opt(validate);
  inputs_opt(validate, 1);

  auto* distance = app.add_subcommand("distance", "distance between two trees, or length of a waypoint path");
  space_opt(distance);
  format_opt(distance);
  hops_opt(distance);
  distance->add_option("--mode", s.mode, "geodesic, cone (t-space cone path) or path (length of listed waypoints)")
      ->check(CLI::IsMember({"geodesic", "cone", "path"}))
      ->capture_default_str();
  inputs_opt(distance, 1);

  auto* geodesic = app.add_subcommand("geodesic", "waypoints of the geodesic between two trees");
  space_opt(geodesic);
  format_opt(geodesic);
  hops_opt(geodesic);
  geodesic->add_option("--points", s.points, "also print this many evenly spaced points on the path")->capture_default_str();
  geodesic->add_option("--mode", s.mode, "geodesic or cone (t-space)")->check(CLI::IsMember({"geodesic", "cone"}))->capture_default_str();
  inputs_opt(geodesic, 1);

  auto* mean = app.add_subcommand("mean", "Frechet mean in tau-space");
  space_opt(mean);
  format_opt(mean);
  mean_opts(mean);
  inputs_opt(mean, 1);

  auto* variance = app.add_subcommand("variance", "Frechet variance in tau-space");
  space_opt(variance);
  format_opt(variance);
  mean_opts(variance);
  inputs_opt(variance, 1);

  auto* mu = app.add_subcommand("mu", "Monte-Carlo estimate of the fraction of cone-path geodesics");
  space_opt(mu);
  n_opt(mu);
  seed_opt(mu);
  dist_opt(mu);
  mu->add_option("--samples", s.samples, "number of tree pairs")->capture_default_str();
  mu->add_option("--jobs", s.jobs, "worker threads (0 = all cores)")->capture_default_str();
  mu->add_flag("--include-same-topology", s.include_same_topology, "count pairs sharing a ranked topology");
  mu->add_option("--precision", s.precision, "significant digits")->check(CLI::Range(1, 17))->capture_default_str();

  auto* enumerate = app.add_subcommand("enumerate", "list or count ranked topologies");
  n_opt(enumerate);
  enumerate->add_flag("--count-only", s.count_only, "print only the number of ranked topologies");

  auto* neighbors = app.add_subcommand("neighbors", "ranked topologies sharing a facet with each input tree");
  format_opt(neighbors);
  inputs_opt(neighbors, 1);

  auto* sample = app.add_subcommand("sample", "draw random trees (uniform ranked topology)");
  format_opt(sample);
  n_opt(sample);
  seed_opt(sample);
  dist_opt(sample);
  sample->add_option("--samples", s.samples, "number of trees")->capture_default_str();

  auto* convert = app.add_subcommand("convert", "rewrite trees in another format");
  format_opt(convert);
  convert->add_option("--to", s.to, "output format: newick or ranked")->check(CLI::IsMember({"newick", "ranked"}))->capture_default_str();
  inputs_opt(convert, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Cli cli(s);
  try {
    if (*validate) return cli.validate();
    if (*distance) {
      if (s.mode == "cone" && s.space != "t") {
        std::cerr << "usage: --mode cone requires --space t\n";
        return 2;
      }
      return cli.distance();
    }
    if (*geodesic) return cli.geodesic();
    if (*mean) return cli.mean();
    if (*variance) return cli.variance();
    if (*mu) return cli.mu();
    if (*enumerate) return cli.enumerate();
    if (*neighbors) return cli.neighbors();
    if (*sample) return cli.sample();
    if (*convert) return cli.convert();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
