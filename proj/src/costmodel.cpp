#include "goa/costmodel.hpp"

#include <cmath>

#include "goa/error.hpp"

namespace goa {

std::string_view component_name(Component c) {
  switch (c) {
    case Component::mzi: return "mzi";
    case Component::mrr: return "mrr";
    case Component::dac: return "dac";
    case Component::eom: return "eom";
    case Component::splitter: return "splitter";
    case Component::pd: return "pd";
    case Component::tia: return "tia";
    case Component::adc: return "adc";
  }
  return "unknown";
}

void DeviceParams::validate() const {
  auto check = [](double v, std::string_view what) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::invalid_argument,
                  "device params: " + std::string(what) + " must be finite and >= 0");
    }
  };
  for (Component c : kComponents) {
    const auto& e = (*this)[c];
    const std::string name(component_name(c));
    check(e.area_um2, name + ".area_um2");
    check(e.static_power_mw, name + ".static_power_mw");
    check(e.dynamic_energy_pj, name + ".dynamic_energy_pj");
    check(e.latency_ns, name + ".latency_ns");
  }
  check(eo_latency_ns, "eo_conversion.latency_ns");
  check(eo_energy_pj, "eo_conversion.energy_pj");
}

DeviceParams DeviceParams::scaled(double factor) const {
  DeviceParams out = *this;
  for (auto& e : out.entries) {
    e.area_um2 *= factor;
    e.static_power_mw *= factor;
    e.dynamic_energy_pj *= factor;
    e.latency_ns *= factor;
  }
  out.eo_latency_ns *= factor;
  out.eo_energy_pj *= factor;
  return out;
}

std::size_t mzis_per_module(std::size_t k) { return k * (k - 1) / 2 + k; }

ComponentCounts component_counts(const GoaArch& arch) {
  ComponentCounts c;
  c[Component::mzi] = arch.m * arch.n * mzis_per_module(arch.k);
  c[Component::mrr] = arch.m * arch.n * arch.k;
  c[Component::dac] = c[Component::eom] = c[Component::splitter] = arch.m * arch.k;
  c[Component::pd] = c[Component::tia] = c[Component::adc] = arch.n * arch.k;
  return c;
}

CostReport estimate(const MappingPlan& plan, const DeviceParams& params) {
  params.validate();
  const auto& arch = plan.arch;
  CostReport r;
  r.counts = component_counts(arch);
  r.passes = mapping_cost(plan);
  r.eo_conversions = eo_conversions(plan);
  for (const auto& pass : plan.passes) {
    for (const auto& p : pass) r.programmed_mzis += p.height * p.width * mzis_per_module(arch.k);
  }

  double per_pass_dynamic = 0.0;
  for (Component c : kComponents) {
    const double n = static_cast<double>(r.counts[c]);
    r.area_um2 += n * params[c].area_um2;
    r.power_mw += n * params[c].static_power_mw;
    if (c != Component::mzi) per_pass_dynamic += n * params[c].dynamic_energy_pj;
  }
  r.pass_latency_ns = params[Component::dac].latency_ns + params[Component::eom].latency_ns +
                      params[Component::splitter].latency_ns +
                      static_cast<double>(arch.k + 1) * params[Component::mzi].latency_ns +
                      static_cast<double>(arch.m) * params[Component::mrr].latency_ns +
                      params[Component::pd].latency_ns + params[Component::tia].latency_ns +
                      params[Component::adc].latency_ns;
  const double passes = static_cast<double>(r.passes);
  const double eo = static_cast<double>(r.eo_conversions);
  r.latency_ns = passes * r.pass_latency_ns + eo * params.eo_latency_ns;
  r.energy_pj = passes * per_pass_dynamic +
                static_cast<double>(r.programmed_mzis) * params[Component::mzi].dynamic_energy_pj +
                eo * params.eo_energy_pj;
  r.formulas =
      "area = sum(count*area); power = sum(count*static_power); "
      "pass_latency = dac+eom+splitter+(k+1)*mzi+m*mrr+pd+tia+adc; "
      "latency = passes*pass_latency + eo_conversions*eo_latency (sequential passes); "
      "energy = passes*sum_{non-MZI}(count*dynamic) + programmed_mzis*mzi_dynamic + "
      "eo_conversions*eo_energy";
  return r;
}

}  // namespace goa
