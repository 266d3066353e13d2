#include "ecodse/front_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecodse/errors.hpp"

namespace ecodse {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

json config_values_json(const Configuration& config) {
  json j = json::array();
  for (const auto& v : config.values) {
    if (knob_value_is_numeric(v)) j.push_back(std::get<double>(v));
    else j.push_back(std::get<std::string>(v));
  }
  return j;
}

}  // namespace

void write_front_csv(const std::string& path, const DesignSpace& space, const ParetoFront& front,
                     const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw Error("front: cannot write '" + path + "'");
  if (!config_echo.empty()) out << "# " << config_echo << '\n';
  out << "config_id";
  for (const auto& knob : space.knobs()) out << ',' << knob.name;
  out << ",area,latency,lut,ff,dsp,bram\n";
  for (const auto& e : front.entries) {
    out << space.rank_of(e.config);
    for (const auto& v : e.config.values) out << ',' << knob_value_to_string(v);
    out << ',' << format_double(e.objectives.area) << ','
        << format_double(e.objectives.latency_cycles) << ',' << format_double(e.qor.lut) << ','
        << format_double(e.qor.ff) << ',' << format_double(e.qor.dsp) << ','
        << format_double(e.qor.bram) << '\n';
  }
}

ParetoFront read_front_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("front: cannot open '" + path + "'");
  ParetoFront front;
  std::string line;
  std::vector<std::string> header;
  int area_col = -1, latency_col = -1, lut_col = -1, ff_col = -1, dsp_col = -1, bram_col = -1;
  int first_knob = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "area") area_col = static_cast<int>(i);
        else if (header[i] == "latency") latency_col = static_cast<int>(i);
        else if (header[i] == "lut") lut_col = static_cast<int>(i);
        else if (header[i] == "ff") ff_col = static_cast<int>(i);
        else if (header[i] == "dsp") dsp_col = static_cast<int>(i);
        else if (header[i] == "bram") bram_col = static_cast<int>(i);
      }
      if (area_col < 0 || latency_col < 0)
        throw SchemaError("front '" + path + "': header lacks area/latency columns");
      first_knob = header.front() == "config_id" ? 1 : 0;
      continue;
    }
    if (cells.size() != header.size())
      throw SchemaError("front '" + path + "': ragged row");
    FrontEntry e;
    for (int i = first_knob; i < area_col; ++i) {
      const std::string& s = cells[i];
      try {
        std::size_t used = 0;
        const double num = std::stod(s, &used);
        if (used == s.size()) {
          e.config.values.emplace_back(num);
          continue;
        }
      } catch (...) {
      }
      e.config.values.emplace_back(s);
    }
    e.objectives.area = std::stod(cells[area_col]);
    e.objectives.latency_cycles = std::stod(cells[latency_col]);
    e.qor.latency = e.objectives.latency_cycles;
    if (lut_col >= 0) e.qor.lut = std::stod(cells[lut_col]);
    if (ff_col >= 0) e.qor.ff = std::stod(cells[ff_col]);
    if (dsp_col >= 0) e.qor.dsp = std::stod(cells[dsp_col]);
    if (bram_col >= 0) e.qor.bram = std::stod(cells[bram_col]);
    front.entries.push_back(std::move(e));
  }
  return front;
}

void write_run_log(const std::string& path, const SearchResult& result,
                   const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw Error("run log: cannot write '" + path + "'");
  if (!config_echo.empty()) {
    json head;
    head["config"] = json::parse(config_echo);
    out << head.dump() << '\n';
  }
  for (const auto& rec : result.log) {
    json j;
    j["iter"] = rec.iter;
    j["config"] = config_values_json(rec.config);
    if (rec.failed) {
      j["failed"] = true;
    } else {
      j["objectives"] = {{"area", rec.objectives.area},
                         {"latency", rec.objectives.latency_cycles}};
    }
    j["elapsed_ms"] = rec.elapsed_ms;
    out << j.dump() << '\n';
  }
}

void write_transcript(const std::string& path, const SearchResult& result,
                      const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw Error("transcript: cannot write '" + path + "'");
  if (!config_echo.empty()) {
    json head;
    head["config"] = json::parse(config_echo);
    out << head.dump() << '\n';
  }
  for (const auto& rec : result.transcript) {
    json j;
    j["iter"] = rec.iter;
    j["prompt_hash"] = rec.prompt_hash;
    j["temperature"] = rec.temperature;
    j["response_excerpt"] = rec.response_excerpt;
    j["diagnostics"] = {{"valid", rec.valid},
                        {"repaired", rec.repaired},
                        {"dropped", rec.dropped},
                        {"padded", rec.padded}};
    out << j.dump() << '\n';
  }
}

}  // namespace ecodse
