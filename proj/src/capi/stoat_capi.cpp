#include "stoat/stoat.h"

#include <exception>
#include <filesystem>
#include <string>

#include "error.hpp"
#include "io/artifacts.hpp"
#include "io/config.hpp"
#include "io/csv.hpp"
#include "io/pipeline.hpp"
#include "metrics.hpp"
#include "probmodel/model.hpp"
#include "spatial.hpp"

struct stoat_config {
  stoat::RunConfig value;
};

struct stoat_spatial {
  stoat::SpatialMatrix value;
};

struct stoat_model {
  stoat::ForecastModel value;
};

namespace {

thread_local std::string last_error;

template <class F>
int guard(F&& body) {
  try {
    body();
    last_error.clear();
    return STOAT_OK;
  } catch (const stoat::Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return STOAT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return STOAT_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return STOAT_ERR_INTERNAL;
  }
}

void non_null(const void* p, const char* what) {
  stoat::require(p != nullptr, stoat::ErrorCode::kInvalidInput, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* stoat_version(void) { return "1.0.0"; }

const char* stoat_status_name(int status) {
  // Names are string literals, so the view is NUL-terminated.
  return stoat::error_code_name(static_cast<stoat::ErrorCode>(status)).data();
}

const char* stoat_last_error(void) { return last_error.c_str(); }

int stoat_config_new(stoat_config** out) {
  return guard([&] {
    non_null(out, "out");
    *out = new stoat_config{};
  });
}

int stoat_config_load(const char* path, stoat_config** out) {
  return guard([&] {
    non_null(path, "path");
    non_null(out, "out");
    *out = new stoat_config{stoat::RunConfig::load(path)};
  });
}

void stoat_config_free(stoat_config* config) { delete config; }

int stoat_config_set(stoat_config* config, const char* key, const char* value) {
  return guard([&] {
    non_null(config, "config");
    non_null(key, "key");
    non_null(value, "value");
    config->value.set(key, value);
  });
}

int stoat_config_get(const stoat_config* config, const char* key, char* buf, size_t capacity,
                     size_t* needed) {
  return guard([&] {
    non_null(config, "config");
    non_null(key, "key");
    const std::string& v = config->value.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && capacity > 0) {
      const size_t n = std::min(capacity - 1, v.size());
      v.copy(buf, n);
      buf[n] = '\0';
    }
  });
}

size_t stoat_config_key_count(void) { return stoat::config_keys().size(); }

int stoat_config_key_info(size_t index, const char** name, const char** default_value,
                          const char** description) {
  return guard([&] {
    const auto& keys = stoat::config_keys();
    stoat::require(index < keys.size(), stoat::ErrorCode::kInvalidInput, "config key index out of range");
    if (name) *name = keys[index].name.c_str();
    if (default_value) *default_value = keys[index].default_value.c_str();
    if (description) *description = keys[index].description.c_str();
  });
}

int stoat_run_stage(const stoat_config* config, const char* stage) {
  return guard([&] {
    non_null(config, "config");
    non_null(stage, "stage");
    stoat::run_stage(stoat::parse_stage(stage), config->value);
  });
}

int stoat_evaluate_files(const char* forecast_path, const char* truth_path, const char* out_dir,
                         const char* model_label) {
  return guard([&] {
    non_null(forecast_path, "forecast_path");
    non_null(truth_path, "truth_path");
    non_null(out_dir, "out_dir");
    const auto f = stoat::read_forecast_samples(forecast_path);
    const auto e = stoat::evaluate_forecast(f, stoat::align_truth(f, stoat::read_truth(truth_path)));
    const std::string dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    stoat::require(!ec, stoat::ErrorCode::kIo, "cannot create '" + dir + "'");
    stoat::write_text_file(dir + "/scores.csv", stoat::scores_csv(e.summary.overall));
    stoat::write_text_file(dir + "/scores_by_region.csv", stoat::scores_by_region_csv(e.summary));
    stoat::write_text_file(dir + "/scores_long.csv",
                           stoat::scores_long_csv(model_label ? model_label : "model", e));
  });
}

int stoat_geodesic_distance(double lat1, double lon1, double lat2, double lon2, double* km) {
  return guard([&] {
    non_null(km, "km");
    stoat::validate_point({lat1, lon1});
    stoat::validate_point({lat2, lon2});
    *km = stoat::geodesic_distance({lat1, lon1}, {lat2, lon2});
  });
}

int stoat_spatial_build(size_t n, const double* lat, const double* lon, double alpha,
                        stoat_spatial** out) {
  return guard([&] {
    non_null(out, "out");
    stoat::require(n == 0 || (lat && lon), stoat::ErrorCode::kInvalidInput, "coordinates are null");
    std::vector<stoat::Region> regions;
    for (size_t i = 0; i < n; ++i) regions.push_back({"r" + std::to_string(i), {lat[i], lon[i]}, false});
    *out = new stoat_spatial{stoat::build_spatial_matrix(stoat::RegionSet(regions), alpha)};
  });
}

void stoat_spatial_free(stoat_spatial* s) { delete s; }

size_t stoat_spatial_size(const stoat_spatial* s) { return s ? s->value.n() : 0; }

int stoat_spatial_weights(const stoat_spatial* s, double* out) {
  return guard([&] {
    non_null(s, "spatial");
    non_null(out, "out");
    const size_t n = s->value.n();
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) out[i * n + j] = s->value(i, j);
  });
}

int stoat_quantile(const double* samples, size_t n, double q, double* out) {
  return guard([&] {
    non_null(out, "out");
    stoat::require(n == 0 || samples, stoat::ErrorCode::kInvalidInput, "samples is null");
    *out = stoat::quantile({samples, n}, q);
  });
}

int stoat_crps(const double* samples, size_t n, double observed, double* out) {
  return guard([&] {
    non_null(out, "out");
    stoat::require(n == 0 || samples, stoat::ErrorCode::kInvalidInput, "samples is null");
    *out = stoat::crps_from_samples({samples, n}, observed);
  });
}

int stoat_energy_score(const double* paths, size_t n_paths, size_t dim, const double* observed,
                       double* out) {
  return guard([&] {
    non_null(out, "out");
    non_null(paths, "paths");
    non_null(observed, "observed");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::MatrixXd p = Eigen::Map<const RowMajor>(paths, static_cast<Eigen::Index>(n_paths),
                                                         static_cast<Eigen::Index>(dim));
    const Eigen::VectorXd o = Eigen::Map<const Eigen::VectorXd>(observed, static_cast<Eigen::Index>(dim));
    *out = stoat::energy_score(p, o);
  });
}

int stoat_model_load(const char* path, stoat_model** out) {
  return guard([&] {
    non_null(path, "path");
    non_null(out, "out");
    *out = new stoat_model{stoat::load_checkpoint(path)};
  });
}

int stoat_model_save(const stoat_model* model, const char* path) {
  return guard([&] {
    non_null(model, "model");
    non_null(path, "path");
    stoat::save_checkpoint(model->value, path);
  });
}

void stoat_model_free(stoat_model* model) { delete model; }

int stoat_model_info(const stoat_model* model, size_t* regions, size_t* context_len, size_t* horizon) {
  return guard([&] {
    non_null(model, "model");
    if (regions) *regions = model->value.region_ids().size();
    if (context_len) *context_len = model->value.config().context_len;
    if (horizon) *horizon = model->value.config().horizon;
  });
}

int stoat_model_forecast(const stoat_model* model, const double* z, const double* y, size_t regions,
                         size_t periods, size_t horizon, size_t num_samples, uint64_t seed,
                         double* out) {
  return guard([&] {
    non_null(model, "model");
    non_null(z, "z");
    non_null(y, "y");
    non_null(out, "out");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto r = static_cast<Eigen::Index>(regions);
    const auto t = static_cast<Eigen::Index>(periods);
    const Eigen::MatrixXd zm = Eigen::Map<const RowMajor>(z, r, t);
    const Eigen::MatrixXd ym = Eigen::Map<const RowMajor>(y, r, t);
    const auto f = stoat::forecast(model->value, zm, ym, horizon, num_samples, seed);
    std::copy(f.values().begin(), f.values().end(), out);
  });
}

}  // extern "C"
