#include <charconv>
#include <fstream>
#include <sstream>

#include "../error.hpp"
#include "model.hpp"

namespace stoat {

namespace {

constexpr const char* kMagic = "stoat-checkpoint";
constexpr int kVersion = 1;

std::string exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_exact(const std::string& token, const std::string& path) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  require(res.ec == std::errc() && res.ptr == token.data() + token.size(), ErrorCode::kParse,
          path + ": malformed number '" + token + "'");
  return v;
}

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  std::string line() {
    std::string s;
    require(static_cast<bool>(std::getline(in_, s)), ErrorCode::kParse,
            path_ + ": unexpected end of checkpoint at line " + std::to_string(line_no_ + 1));
    ++line_no_;
    return s;
  }

  // Reads "key value" and returns value.
  std::string field(const std::string& key) {
    const std::string s = line();
    const auto space = s.find(' ');
    require(space != std::string::npos && s.substr(0, space) == key, ErrorCode::kParse,
            path_ + ":" + std::to_string(line_no_) + ": expected '" + key + "'");
    return s.substr(space + 1);
  }

  std::uint64_t integer(const std::string& key) {
    const std::string v = field(key);
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::kParse,
            path_ + ":" + std::to_string(line_no_) + ": bad integer for '" + key + "'");
    return out;
  }

  double real(const std::string& key) { return parse_exact(field(key), where()); }

  std::vector<double> reals(std::size_t count) {
    std::istringstream ss(line());
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_exact(tok, where()));
    require(out.size() == count, ErrorCode::kParse,
            where() + ": expected " + std::to_string(count) + " values");
    return out;
  }

  std::string where() const { return path_ + ":" + std::to_string(line_no_); }

 private:
  std::istream& in_;
  std::string path_;
  std::size_t line_no_ = 0;
};

void write_row(std::ostream& out, const double* data, Eigen::Index n) {
  for (Eigen::Index k = 0; k < n; ++k) out << (k ? " " : "") << exact(data[k]);
  out << '\n';
}

}  // namespace

void save_checkpoint(const ForecastModel& model, const std::string& path) {
  std::ostringstream out;
  const auto& c = model.config();
  out << kMagic << ' ' << kVersion << '\n';
  out << "hidden_size " << c.hidden_size << '\n';
  out << "num_layers " << c.num_layers << '\n';
  out << "distribution " << family_name(c.distribution) << '\n';
  out << "context_len " << c.context_len << '\n';
  out << "horizon " << c.horizon << '\n';
  out << "learning_rate " << exact(c.learning_rate) << '\n';
  out << "epochs " << c.epochs << '\n';
  out << "grad_clip " << exact(c.grad_clip) << '\n';
  out << "num_samples " << c.num_samples << '\n';
  out << "seed " << c.seed << '\n';
  out << "momentum " << exact(c.momentum) << '\n';
  out << "batch_size " << c.batch_size << '\n';
  out << "window_stride " << c.window_stride << '\n';
  out << "regions " << model.region_ids().size() << '\n';
  for (const auto& id : model.region_ids()) out << id << '\n';
  const auto& s = model.scaler;
  for (const auto* v : {&s.z_mean, &s.z_scale, &s.y_mean, &s.y_scale}) write_row(out, v->data(), v->size());
  out << "tensors " << model.layout().size() << '\n';
  for (const auto& b : model.layout()) {
    out << "tensor " << b.name << ' ' << b.rows << ' ' << b.cols << '\n';
    write_row(out, model.parameters().data() + b.offset, b.rows * b.cols);
  }
  out << "end\n";

  std::ofstream file(path, std::ios::binary);
  require(static_cast<bool>(file), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  file << out.str();
  require(static_cast<bool>(file), ErrorCode::kIo, "failed writing '" + path + "'");
}

ForecastModel load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  require(static_cast<bool>(file), ErrorCode::kIo, "cannot open checkpoint '" + path + "'");
  Reader r(file, path);
  require(r.line() == std::string(kMagic) + " " + std::to_string(kVersion), ErrorCode::kParse,
          path + ": not a checkpoint file (bad header)");

  ModelConfig c;
  c.hidden_size = r.integer("hidden_size");
  c.num_layers = r.integer("num_layers");
  c.distribution = parse_family(r.field("distribution"));
  c.context_len = r.integer("context_len");
  c.horizon = r.integer("horizon");
  c.learning_rate = r.real("learning_rate");
  c.epochs = r.integer("epochs");
  c.grad_clip = r.real("grad_clip");
  c.num_samples = r.integer("num_samples");
  c.seed = r.integer("seed");
  c.momentum = r.real("momentum");
  c.batch_size = r.integer("batch_size");
  c.window_stride = r.integer("window_stride");

  const std::size_t n = r.integer("regions");
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(r.line());

  ForecastModel model(c, ids);
  auto& s = model.scaler;
  for (auto* v : {&s.z_mean, &s.z_scale, &s.y_mean, &s.y_scale}) {
    const auto vals = r.reals(n);
    *v = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(n));
  }
  require(r.integer("tensors") == model.layout().size(), ErrorCode::kParse,
          r.where() + ": tensor count does not match the configuration");
  for (const auto& b : model.layout()) {
    std::ostringstream expect;
    expect << b.name << ' ' << b.rows << ' ' << b.cols;
    require(r.field("tensor") == expect.str(), ErrorCode::kParse,
            r.where() + ": expected tensor '" + expect.str() + "'");
    const auto vals = r.reals(static_cast<std::size_t>(b.rows * b.cols));
    std::copy(vals.begin(), vals.end(), model.parameters().data() + b.offset);
  }
  require(r.line() == "end", ErrorCode::kParse, r.where() + ": missing end marker");
  require(model.parameters().allFinite(), ErrorCode::kParse, path + ": non-finite parameter");
  return model;
}

}  // namespace stoat
