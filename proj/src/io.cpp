#include "biaspot/io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace biaspot::io {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  return out;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument("bad numeric field '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 40> buf;
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), p);
}

std::string potential_to_json(const Potential& pot) {
  const FeatureSet& fs = pot.features;
  json j;
  j["schema_version"] = 1;
  j["d"] = fs.d;
  j["m"] = fs.m;
  j["seed"] = fs.seed;
  j["activation"] = to_string(fs.activation);
  if (fs.activation == Activation::smoothed_relu) j["beta"] = fs.beta;
  json features = json::array();
  for (std::size_t r = 0; r < fs.m; ++r) {
    auto row = fs.row(r);
    features.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  j["features"] = std::move(features);
  j["coeffs"] = pot.coeffs;
  return j.dump();
}

Potential potential_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("schema_version", 0) != 1) {
    throw std::invalid_argument("potential file: unsupported schema_version");
  }
  Potential pot;
  FeatureSet& fs = pot.features;
  fs.d = j.at("d").get<int>();
  fs.m = j.at("m").get<std::size_t>();
  fs.seed = j.at("seed").get<std::uint64_t>();
  std::string act = j.at("activation").get<std::string>();
  if (act == "relu") {
    fs.activation = Activation::relu;
  } else if (act == "smoothed-relu") {
    fs.activation = Activation::smoothed_relu;
    fs.beta = j.value("beta", kDefaultSmoothing);
  } else {
    throw std::invalid_argument("potential file: unknown activation '" + act + "'");
  }
  const json& rows = j.at("features");
  if (rows.size() != fs.m) throw std::invalid_argument("potential file: features size != m");
  fs.weights.reserve(fs.m * (fs.d + 1));
  for (const json& row : rows) {
    if (row.size() != static_cast<std::size_t>(fs.d + 1)) {
      throw std::invalid_argument("potential file: feature row size != d+1");
    }
    for (const json& x : row) fs.weights.push_back(x.get<double>());
  }
  pot.coeffs = j.at("coeffs").get<std::vector<double>>();
  if (pot.coeffs.size() != fs.m) throw std::invalid_argument("potential file: coeffs size != m");
  return pot;
}

void save_potential(const Potential& pot, const std::filesystem::path& path) {
  open_out(path) << potential_to_json(pot) << '\n';
}

Potential load_potential(const std::filesystem::path& path) {
  return potential_from_json(read_file(path));
}

void save_samples(const SampleSet& s, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (int k = 0; k < s.d; ++k) out << (k ? "," : "") << 'x' << k;
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto pt = s.point(i);
    for (int k = 0; k < s.d; ++k) out << (k ? "," : "") << format_double(pt[k]);
    out << '\n';
  }
}

SampleSet load_samples(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("samples file: empty");
  SampleSet s;
  s.d = static_cast<int>(split(line, ',').size());
  s.provenance = "file:" + path.string();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != s.d) {
      throw std::invalid_argument("samples file: inconsistent column count");
    }
    for (auto f : fields) s.points.push_back(parse_double(f));
  }
  if (s.points.empty()) throw std::invalid_argument("samples file: no rows");
  return s;
}

void save_density(const GridDensity& q, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "cell_index";
  for (int k = 0; k < q.grid.d; ++k) out << ",x" << k;
  out << ",mass\n";
  std::vector<double> x(static_cast<std::size_t>(q.grid.d));
  for (std::size_t i = 0; i < q.mass.size(); ++i) {
    q.grid.node(i, x);
    out << i;
    for (int k = 0; k < q.grid.d; ++k) out << ',' << format_double(x[k]);
    out << ',' << format_double(q.mass[i]) << '\n';
  }
}

GridDensity load_density(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("density file: empty");
  auto header = split(line, ',');
  if (header.size() < 3) throw std::invalid_argument("density file: bad header");
  int d = static_cast<int>(header.size()) - 2;
  std::vector<double> mass;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    mass.push_back(parse_double(fields.back()));
  }
  double p = std::round(std::pow(static_cast<double>(mass.size()), 1.0 / d));
  Grid grid = make_grid(d, static_cast<int>(p));
  if (grid.cell_count() != mass.size()) {
    throw std::invalid_argument("density file: cell count is not a d-th power");
  }
  return GridDensity{grid, std::move(mass)};
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "step,train_loss,test_kl,rkhs_norm,status\n";
  for (const Checkpoint& cp : traj.checkpoints) {
    out << cp.step << ',' << format_double(cp.train_loss) << ',';
    if (cp.test_kl) out << format_double(*cp.test_kl);
    out << ',' << format_double(cp.rkhs_norm) << ',' << to_string(RunStatus::ok) << '\n';
  }
  if (traj.status == RunStatus::diverged) {
    out << ",,,," << to_string(traj.status) << '\n';
  }
}

void save_flow(const FlowTrajectory& flow, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "step,mmd_sq,min_mass,max_vbar\n";
  for (const FlowRecord& r : flow.records) {
    out << r.step << ',' << format_double(r.mmd_sq) << ',' << format_double(r.min_mass) << ','
        << format_double(r.max_vbar) << '\n';
  }
}

void save_rate_rows(const std::vector<RateResultRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "d,n,trial,seed,T_o,L_o,status\n";
  for (const RateResultRow& r : rows) {
    out << r.d << ',' << r.n << ',' << r.trial << ',' << r.seed << ',' << r.T_o << ','
        << format_double(r.L_o) << ',' << to_string(r.status) << '\n';
  }
}

void save_rate_regressions(const std::vector<RateRegression>& regs,
                           const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "d,alpha,alpha_stderr,t_exponent,t_exponent_stderr,excluded_trials\n";
  for (const RateRegression& r : regs) {
    out << r.d << ',' << format_double(r.alpha) << ',' << format_double(r.alpha_stderr) << ','
        << format_double(r.t_exponent) << ',' << format_double(r.t_exponent_stderr) << ','
        << r.excluded_trials << '\n';
  }
}

void save_memorize_curve(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "step,test_kl,rkhs_norm\n";
  for (const Checkpoint& cp : traj.checkpoints) {
    out << cp.step << ',';
    if (cp.test_kl) out << format_double(*cp.test_kl);
    out << ',' << format_double(cp.rkhs_norm) << '\n';
  }
}

void save_approx_rows(const std::vector<ApproximationRow>& rows,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "m,resample,kl\n";
  for (const ApproximationRow& r : rows) {
    out << r.m << ',' << r.resample << ',' << format_double(r.kl) << '\n';
  }
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

void write_manifest(Manifest m, const std::filesystem::path& path) {
  json j;
  j["command_line"] = m.command_line;
  json cfg = json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = std::move(cfg);
  j["master_seed"] = m.master_seed;
  j["code_version"] = m.code_version.empty() ? kVersion : m.code_version;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at.empty() ? iso_timestamp() : m.finished_at;
  json outs = json::array();
  for (const auto& p : m.outputs) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(p)));
    outs.push_back({{"path", p.filename().string()}, {"fnv1a64", hex}});
  }
  j["outputs"] = std::move(outs);
  if (!m.results.empty()) j["results"] = m.results;
  open_out(path) << j.dump(2) << '\n';
}

std::string manifest_timestamp() { return iso_timestamp(); }

namespace {

double plot_coord(double v, bool logscale) { return logscale ? std::log10(v) : v; }

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series, bool loglog) {
  constexpr double W = 640, H = 480, L = 70, R = 20, T = 40, B = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (loglog && (s.xs[i] <= 0.0 || s.ys[i] <= 0.0)) continue;
      xmin = std::min(xmin, plot_coord(s.xs[i], loglog));
      xmax = std::max(xmax, plot_coord(s.xs[i], loglog));
      ymin = std::min(ymin, plot_coord(s.ys[i], loglog));
      ymax = std::max(ymax, plot_coord(s.ys[i], loglog));
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double x) { return L + (plot_coord(x, loglog) - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (plot_coord(y, loglog) - ymin) / (ymax - ymin) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
  auto out = open_out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
  out << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R << "' y2='" << H - B
      << "' stroke='black'/>\n";
  out << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << H - B
      << "' stroke='black'/>\n";
  out << "<text x='" << W / 2 << "' y='" << H - 12 << "' text-anchor='middle' font-size='13'>"
      << xlabel << (loglog ? " (log10)" : "") << "</text>\n";
  out << "<text x='18' y='" << H / 2 << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
      << H / 2 << ")'>" << ylabel << (loglog ? " (log10)" : "") << "</text>\n";
  int ci = 0;
  for (const auto& s : series) {
    const char* color = colors[ci % 5];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (loglog && (s.xs[i] <= 0.0 || s.ys[i] <= 0.0)) continue;
      out << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
    }
    out << "'/>\n";
    out << "<text x='" << W - R - 5 << "' y='" << T + 16 * (ci + 1)
        << "' text-anchor='end' font-size='12' fill='" << color << "'>" << s.name << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

}  // namespace biaspot::io
