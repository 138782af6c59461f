#pragma once

#include <optional>
#include <string>
#include <vector>

#include "../panel.hpp"
#include "../spatial.hpp"

namespace stoat {

struct Dataset {
  RegionSet regions;
  Panel panel;
};

struct IngestOptions {
  std::optional<Date> post_onset;         // Post_t = 0 everywhere when unset
  std::vector<std::string> covariates;    // required covariate columns; empty = take all
};

// Reads regions.csv (region_id,lat,lon,treated) and panel.csv
// (region_id,date,y,<covariates...>). Regions keep the regions.csv order and
// periods are sorted by date. Every rejection names the file and line.
Dataset ingest(const std::string& regions_path, const std::string& panel_path,
               const IngestOptions& options = {});

RegionSet read_regions(const std::string& path);

void write_regions(const std::string& path, const RegionSet& regions);
void write_panel(const std::string& path, const Panel& panel);

}  // namespace stoat
