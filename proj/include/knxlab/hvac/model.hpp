#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "knxlab/error.hpp"

namespace knxlab::hvac {

struct NonFiniteState : Error {
  NonFiniteState() : Error("HVAC state became non-finite") {}
  using Error::Error;
};

// Nondecreasing nonnegative map: offset + linear*u + quadratic*u^2 with
// u = max(0, x - pivot). All coefficients must be nonnegative.
struct MonotoneMap {
  double offset = 0.0;
  double linear = 0.0;
  double quadratic = 0.0;
  double pivot = 0.0;

  double operator()(double x) const {
    const double u = std::max(0.0, x - pivot);
    return offset + linear * u + quadratic * u * u;
  }

  void validate(const char* what) const {
    if (offset < 0 || linear < 0 || quadratic < 0)
      throw Error(std::string(what) + ": power map coefficients must be nonnegative");
  }
};

// Ambient temperature trace, linearly interpolated between samples and
// clamped at the ends.
struct WeatherTrace {
  std::vector<std::pair<double, double>> samples;  // (seconds, celsius)

  static WeatherTrace sinusoid(double mean, double amplitude, double peak_hour,
                               double start_hour, double duration_s,
                               double sample_step = 600.0) {
    WeatherTrace w;
    constexpr double day = 86400.0;
    for (double t = 0.0; t <= duration_s + sample_step; t += sample_step) {
      const double hour = start_hour + t / 3600.0;
      w.samples.emplace_back(
          t, mean + amplitude * std::cos(2.0 * std::numbers::pi *
                                         (hour - peak_hour) * 3600.0 / day));
    }
    return w;
  }

  void validate() const {
    if (samples.empty()) throw Error("weather trace is empty");
    for (std::size_t i = 1; i < samples.size(); ++i)
      if (samples[i].first <= samples[i - 1].first)
        throw Error("weather trace times must strictly increase");
  }

  double ambient_at(double t) const {
    if (samples.empty()) throw Error("weather trace is empty");
    if (t <= samples.front().first) return samples.front().second;
    if (t >= samples.back().first) return samples.back().second;
    auto it = std::lower_bound(
        samples.begin(), samples.end(), t,
        [](const auto& s, double v) { return s.first < v; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double f = (t - lo.first) / (hi.first - lo.first);
    return lo.second + f * (hi.second - lo.second);
  }
};

struct HvacParams {
  double room_setpoint = 22.0;         // degC
  double supply_air_setpoint = 14.0;   // degC
  double supply_water_setpoint = 6.0;  // degC
  double damper_fraction = 0.3;        // 0..1
  double thermal_capacitance = 1.0e8;  // J/degC
  double envelope_conductance = 2.0e4; // W/degC
  double supply_air_gain = 4.0;        // degC supply-air rise per degC error
  double chw_flow_gain = 2.0;          // kg/s per degC of supply-air rise
  double chw_flow_floor = 0.0;         // kg/s idle flow
  double cooling_gain = 111667.0;      // W removed per kg/s at full damper
  MonotoneMap fan_power{35000.0, 8000.0, 2000.0, 22.0};
  MonotoneMap pump_power{18000.0, 3000.0, 300.0, 14.0};
  MonotoneMap chiller_power{55000.0, 4000.0, 200.0, 0.0};
  double step = 60.0;                  // seconds

  void validate() const {
    if (thermal_capacitance <= 0) throw Error("thermal capacitance must be positive");
    if (envelope_conductance < 0) throw Error("envelope conductance must be nonnegative");
    if (step <= 0) throw Error("step must be positive");
    if (supply_water_setpoint >= supply_air_setpoint ||
        supply_air_setpoint >= room_setpoint)
      throw Error("setpoints must order water < supply air < room");
    if (damper_fraction < 0 || damper_fraction > 1)
      throw Error("damper fraction must be within [0,1]");
    if (supply_air_gain < 0 || chw_flow_gain < 0 || chw_flow_floor < 0 ||
        cooling_gain < 0)
      throw Error("control gains must be nonnegative");
    fan_power.validate("fan");
    pump_power.validate("pump");
    chiller_power.validate("chiller");
  }

  // Default power map pivots track the setpoints.
  static HvacParams defaults() {
    HvacParams p;
    p.fan_power.pivot = p.room_setpoint;
    p.pump_power.pivot = p.supply_air_setpoint;
    p.chiller_power.pivot = p.chw_flow_floor;
    return p;
  }
};

struct HvacState {
  double time = 0.0;
  double t_room = 22.0;
  double t_room_reported = 22.0;
  double t_supply_air = 14.0;
  double m_chw = 0.0;       // kg/s
  double p_fan = 0.0;       // W
  double p_pump = 0.0;
  double p_chiller = 0.0;
  double p_total = 0.0;
  double e_total_kwh = 0.0;
};

// One forward-Euler step. The controller acts on the reported temperature
// only; the actual room temperature integrates envelope gains against the
// delivered cooling.
inline HvacState hvac_step(const HvacState& state, const HvacParams& p,
                           double ambient, double reported) {
  HvacState next = state;
  next.t_room_reported = reported;

  const double error = std::max(0.0, reported - p.room_setpoint);
  next.t_supply_air = p.supply_air_setpoint + p.supply_air_gain * error;
  next.m_chw = p.chw_flow_floor +
               p.chw_flow_gain *
                   std::max(0.0, next.t_supply_air - p.supply_air_setpoint);

  next.p_fan = p.fan_power(reported);
  next.p_pump = p.pump_power(next.t_supply_air);
  next.p_chiller = p.chiller_power(next.m_chw);
  next.p_total = next.p_fan + next.p_pump + next.p_chiller;

  const double q_cool = p.damper_fraction * p.cooling_gain * next.m_chw;
  const double dT = (p.envelope_conductance * (ambient - state.t_room) - q_cool) /
                    p.thermal_capacitance;
  next.t_room = state.t_room + p.step * dT;
  next.e_total_kwh = state.e_total_kwh + next.p_total * p.step / 3.6e6;
  next.time = state.time + p.step;

  if (!std::isfinite(next.t_room) || !std::isfinite(next.p_total) ||
      !std::isfinite(next.e_total_kwh))
    throw NonFiniteState("HVAC state became non-finite at t=" +
                         std::to_string(next.time));
  return next;
}

struct EnergyBreakdown {
  double fan_kwh = 0.0;
  double pump_kwh = 0.0;
  double chiller_kwh = 0.0;
  double total_kwh = 0.0;
};

struct Trajectory {
  std::vector<HvacState> steps;
  EnergyBreakdown energy;
};

// Runs the loop for duration_s; reported(t_room) models the falsified sensor.
inline Trajectory run_hvac(const HvacParams& params, const WeatherTrace& weather,
                           const std::function<double(double)>& reported,
                           double duration_s) {
  params.validate();
  weather.validate();
  if (duration_s <= 0) throw Error("duration must be positive");

  Trajectory out;
  HvacState state;
  state.t_room = weather.ambient_at(0.0);
  state.t_room_reported = reported(state.t_room);
  const auto steps = static_cast<std::size_t>(duration_s / params.step);
  out.steps.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double ambient = weather.ambient_at(state.time);
    state = hvac_step(state, params, ambient, reported(state.t_room));
    out.energy.fan_kwh += state.p_fan * params.step / 3.6e6;
    out.energy.pump_kwh += state.p_pump * params.step / 3.6e6;
    out.energy.chiller_kwh += state.p_chiller * params.step / 3.6e6;
    out.steps.push_back(state);
  }
  out.energy.total_kwh = state.e_total_kwh;
  return out;
}

struct ImpactReport {
  Trajectory baseline;
  Trajectory attacked;
  EnergyBreakdown additional;
};

// Paired baseline/attacked runs from identical initial state; the additional
// energy per component quantifies the cost of the injected data.
inline ImpactReport run_attack_impact(
    const HvacParams& params, const WeatherTrace& weather,
    const std::function<double(double)>& falsify, double duration_s) {
  ImpactReport report;
  report.baseline = run_hvac(params, weather, [](double t) { return t; },
                             duration_s);
  report.attacked = run_hvac(params, weather, falsify, duration_s);
  report.additional.fan_kwh =
      report.attacked.energy.fan_kwh - report.baseline.energy.fan_kwh;
  report.additional.pump_kwh =
      report.attacked.energy.pump_kwh - report.baseline.energy.pump_kwh;
  report.additional.chiller_kwh =
      report.attacked.energy.chiller_kwh - report.baseline.energy.chiller_kwh;
  report.additional.total_kwh =
      report.attacked.energy.total_kwh - report.baseline.energy.total_kwh;
  return report;
}

// CSV trajectory: time_s,T_r,T_r_reported,P_fan_W,P_pump_W,P_chiller_W,
// P_total_W,E_total_kWh.
inline void write_trajectory_csv(const Trajectory& tr, std::ostream& out) {
  out << "time_s,T_r,T_r_reported,P_fan_W,P_pump_W,P_chiller_W,P_total_W,"
         "E_total_kWh\n";
  char row[256];
  for (const auto& s : tr.steps) {
    std::snprintf(row, sizeof row, "%.1f,%.6f,%.6f,%.3f,%.3f,%.3f,%.3f,%.9f\n",
                  s.time, s.t_room, s.t_room_reported, s.p_fan, s.p_pump,
                  s.p_chiller, s.p_total, s.e_total_kwh);
    out << row;
  }
}

inline void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open trajectory file for writing: " + path);
  write_trajectory_csv(tr, out);
}

}  // namespace knxlab::hvac
