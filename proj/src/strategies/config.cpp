#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "invlab/strategies/strategies.hpp"

namespace invlab::strategies {

namespace {

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  std::array<char, 40> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

double get_double(const std::map<std::string, std::string>& kv, const char* key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::size_t used = 0;
  const double v = std::stod(it->second, &used);
  if (used != it->second.size()) throw std::invalid_argument(std::string("bad number for ") + key);
  return v;
}

}  // namespace

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::ce: return "ce";
    case LossKind::focal: return "focal";
    case LossKind::ldam: return "ldam";
  }
  return "?";
}

std::string to_string(Schedule s) {
  switch (s) {
    case Schedule::erm: return "erm";
    case Schedule::rs: return "rs";
    case Schedule::cb_rs: return "cb_rs";
    case Schedule::drs: return "drs";
    case Schedule::drw: return "drw";
    case Schedule::cb_rw: return "cb_rw";
  }
  return "?";
}

LossKind parse_loss(const std::string& s) {
  if (s == "ce") return LossKind::ce;
  if (s == "focal") return LossKind::focal;
  if (s == "ldam") return LossKind::ldam;
  throw std::invalid_argument("unknown loss '" + s + "' (ce|focal|ldam)");
}

Schedule parse_schedule(const std::string& s) {
  for (Schedule k : {Schedule::erm, Schedule::rs, Schedule::cb_rs, Schedule::drs, Schedule::drw, Schedule::cb_rw})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown schedule '" + s + "' (erm|rs|cb_rs|drs|drw|cb_rw)");
}

void StrategyConfig::validate(int total_epochs) const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 0");
  if (!(max_margin > 0.0) || !std::isfinite(max_margin)) throw std::invalid_argument("max_margin must be > 0");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("scale must be > 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
  if (schedule == Schedule::drs || schedule == Schedule::drw) {
    if (switch_epoch < 0) throw std::invalid_argument("switch_epoch must be >= 0");
    if (total_epochs > 0 && switch_epoch >= total_epochs)
      throw std::invalid_argument("switch_epoch must be smaller than the number of epochs");
  }
}

std::map<std::string, std::string> StrategyConfig::to_kv() const {
  return {{"loss", to_string(loss)},
          {"gamma", fmt(gamma)},
          {"max_margin", fmt(max_margin)},
          {"scale", fmt(scale)},
          {"schedule", to_string(schedule)},
          {"beta", fmt(beta)},
          {"switch_epoch", std::to_string(switch_epoch)}};
}

StrategyConfig StrategyConfig::from_kv(const std::map<std::string, std::string>& kv) {
  StrategyConfig c;
  if (auto it = kv.find("loss"); it != kv.end()) c.loss = parse_loss(it->second);
  if (auto it = kv.find("schedule"); it != kv.end()) c.schedule = parse_schedule(it->second);
  c.gamma = get_double(kv, "gamma", c.gamma);
  c.max_margin = get_double(kv, "max_margin", c.max_margin);
  c.scale = get_double(kv, "scale", c.scale);
  c.beta = get_double(kv, "beta", c.beta);
  if (auto it = kv.find("switch_epoch"); it != kv.end()) c.switch_epoch = std::stoi(it->second);
  return c;
}

std::string StrategyConfig::label() const {
  std::string l = loss == LossKind::ce ? "CE" : loss == LossKind::focal ? "Focal" : "LDAM";
  switch (schedule) {
    case Schedule::erm: return l;
    case Schedule::rs: return l + "+RS";
    case Schedule::cb_rs: return l + "+CB_RS";
    case Schedule::drs: return l + "+DRS";
    case Schedule::drw: return l + "+DRW";
    case Schedule::cb_rw: return l + "+CB_RW";
  }
  return l;
}

}  // namespace invlab::strategies
