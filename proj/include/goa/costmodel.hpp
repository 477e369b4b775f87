#pragma once

// Device counts and linear area/power/latency/energy estimates.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "goa/mapper.hpp"
#include "goa/photonic.hpp"

namespace goa {

enum class Component { mzi, mrr, dac, eom, splitter, pd, tia, adc };

inline constexpr std::array<Component, 8> kComponents = {
    Component::mzi, Component::mrr, Component::dac, Component::eom,
    Component::splitter, Component::pd, Component::tia, Component::adc};

std::string_view component_name(Component c);

struct DeviceEntry {
  double area_um2 = 0.0;
  double static_power_mw = 0.0;
  double dynamic_energy_pj = 0.0;  // per pass; for MZIs, per phase update
  double latency_ns = 0.0;         // along the optical path, per device stage

  friend bool operator==(const DeviceEntry&, const DeviceEntry&) = default;
};

struct DeviceParams {
  std::array<DeviceEntry, kComponents.size()> entries{};
  double eo_latency_ns = 0.0;
  double eo_energy_pj = 0.0;
  std::string note;

  DeviceEntry& operator[](Component c) { return entries[static_cast<std::size_t>(c)]; }
  const DeviceEntry& operator[](Component c) const { return entries[static_cast<std::size_t>(c)]; }

  /// Throws goa::Error(invalid_argument) on negative or non-finite values.
  void validate() const;
  DeviceParams scaled(double factor) const;

  friend bool operator==(const DeviceParams&, const DeviceParams&) = default;
};

struct ComponentCounts {
  std::array<std::size_t, kComponents.size()> counts{};

  std::size_t operator[](Component c) const { return counts[static_cast<std::size_t>(c)]; }
  std::size_t& operator[](Component c) { return counts[static_cast<std::size_t>(c)]; }

  friend bool operator==(const ComponentCounts&, const ComponentCounts&) = default;
};

/// MZIs m n (k(k-1)/2 + k), MRRs m n k, DACs = EOMs = splitters m k,
/// PDs = TIAs = ADCs n k.
ComponentCounts component_counts(const GoaArch& arch);

std::size_t mzis_per_module(std::size_t k);

struct CostReport {
  ComponentCounts counts;
  double area_um2 = 0.0;
  double power_mw = 0.0;
  double latency_ns = 0.0;
  double energy_pj = 0.0;
  std::size_t passes = 0;
  std::size_t eo_conversions = 0;
  std::size_t programmed_mzis = 0;
  double pass_latency_ns = 0.0;
  std::string formulas;
};

/// Sequential-pass accounting:
///   area    = sum_c count_c area_c
///   power   = sum_c count_c static_power_c
///   pass    = dac + eom + splitter + (k+1) mzi + m mrr + pd + tia + adc latencies
///   latency = passes * pass + eo_conversions * eo_latency
///   energy  = passes * sum_{c != mzi} count_c dynamic_c
///           + programmed_mzis * dynamic_mzi + eo_conversions * eo_energy
/// where programmed_mzis counts every MZI of every occupied module, per pass.
CostReport estimate(const MappingPlan& plan, const DeviceParams& params);

}  // namespace goa
