#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qar/basis.hpp"
#include "qar/steady.hpp"
#include "qar/types.hpp"

namespace qar {

using Json = nlohmann::json;

inline SectorKind sector_kind_from_string(const std::string& s) {
  if (s == "full") return SectorKind::FullSpace;
  if (s == "symmetric") return SectorKind::Symmetric;
  if (s == "casimir2") return SectorKind::SecondCasimir;
  if (s == "coarse-grained") return SectorKind::CoarseGrained;
  throw ConfigError("unknown sector kind: " + s);
}

// Sector cache document: {kind, N, states, energies, casimir2}.
inline Json sector_to_json(const BasisSector& sector) {
  Json j;
  j["kind"] = to_string(sector.kind);
  j["N"] = sector.qutrits;
  j["big_gap"] = sector.big_gap;
  j["states"] = sector.labels;
  j["energies"] = sector.energies;
  if (std::isfinite(sector.casimir2)) j["casimir2"] = sector.casimir2;
  j["large_counts"] = sector.large_counts;
  j["small_counts"] = sector.small_counts;
  if (sector.embedding.size() != 0) {
    Json emb = Json::array();
    for (int c = 0; c < sector.embedding.cols(); ++c) {
      Json col = Json::array();
      for (int r = 0; r < sector.embedding.rows(); ++r) {
        col.push_back(sector.embedding(r, c).real());
        col.push_back(sector.embedding(r, c).imag());
      }
      emb.push_back(std::move(col));
    }
    j["embedding"] = std::move(emb);
  }
  return j;
}

inline SectorPtr sector_from_json(const Json& j) {
  auto sector = std::make_shared<BasisSector>();
  sector->kind = sector_kind_from_string(j.at("kind").get<std::string>());
  sector->qutrits = j.at("N").get<int>();
  sector->big_gap = j.value("big_gap", 0.0);
  sector->labels = j.at("states").get<std::vector<std::string>>();
  sector->energies = j.at("energies").get<std::vector<double>>();
  if (j.contains("casimir2")) sector->casimir2 = j["casimir2"].get<double>();
  sector->large_counts = j.value("large_counts", std::vector<int>{});
  sector->small_counts = j.value("small_counts", std::vector<int>{});
  if (j.contains("embedding")) {
    const auto& emb = j["embedding"];
    const int cols = static_cast<int>(emb.size());
    const int rows = cols ? static_cast<int>(emb[0].size()) / 2 : 0;
    sector->embedding.resize(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r)
        sector->embedding(r, c) =
            Complex(emb[c][2 * r].get<double>(), emb[c][2 * r + 1].get<double>());
  }
  return sector;
}

// Steady states travel with the fingerprint of every input that produced
// them, so cached entries can be trusted on reuse.
inline Json steady_to_json(const SteadyState& ss, const std::string& fingerprint) {
  Json j;
  j["fingerprint"] = fingerprint;
  j["sector"] = sector_to_json(*ss.sector);
  j["residual"] = ss.residual;
  j["density_form"] = ss.density_form;
  switch (ss.method) {
    case SteadyMethod::NullSpace: j["method"] = "null-space"; break;
    case SteadyMethod::Tridiagonal: j["method"] = "tridiagonal"; break;
    case SteadyMethod::LongTimeEvolution: j["method"] = "evolution"; break;
  }
  Json state = Json::array();
  for (int i = 0; i < ss.state.size(); ++i) {
    state.push_back(ss.state(i).real());
    state.push_back(ss.state(i).imag());
  }
  j["state"] = std::move(state);
  return j;
}

inline SteadyState steady_from_json(const Json& j, const std::string& expected_fingerprint) {
  if (j.at("fingerprint").get<std::string>() != expected_fingerprint)
    throw ConfigError("cached steady state belongs to a different scenario");
  SteadyState ss;
  ss.sector = sector_from_json(j.at("sector"));
  ss.residual = j.at("residual").get<double>();
  ss.density_form = j.at("density_form").get<bool>();
  const std::string method = j.at("method").get<std::string>();
  ss.method = method == "tridiagonal" ? SteadyMethod::Tridiagonal
              : method == "evolution" ? SteadyMethod::LongTimeEvolution
                                      : SteadyMethod::NullSpace;
  const auto& state = j.at("state");
  ss.state.resize(state.size() / 2);
  for (int i = 0; i < ss.state.size(); ++i)
    ss.state(i) = Complex(state[2 * i].get<double>(), state[2 * i + 1].get<double>());
  return ss;
}

}  // namespace qar
