#include "stt/state.hpp"

#include <cmath>
#include <json.hpp>

namespace stt {

namespace {

bool finite(Complex a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }

double norm2(Complex a) { return std::norm(a); }

}  // namespace

char pol_char(Polarization p) { return p == Polarization::H ? 'H' : 'V'; }

Polarization pol_from_char(char c) {
  if (c == 'H' || c == 'h') return Polarization::H;
  if (c == 'V' || c == 'v') return Polarization::V;
  throw std::invalid_argument(std::string("unknown polarization '") + c + "'");
}

std::string to_string(const ModeLabel& label) {
  return std::string("|") + pol_char(label.pol) + ", l=" + std::to_string(label.l) +
         ", p=" + std::to_string(label.p) + ", bin=" + std::to_string(label.bin) + ">";
}

PulseState PulseState::basis(const ModeLabel& label, double t0) {
  if (label.p < 0) throw std::invalid_argument("ModeLabel: radial index p must be >= 0");
  PulseState s(t0);
  s.amps_[label] = Complex(1.0, 0.0);
  return s;
}

Complex PulseState::amplitude(const ModeLabel& label) const {
  auto it = amps_.find(label);
  return it == amps_.end() ? Complex(0.0, 0.0) : it->second;
}

PulseState PulseState::with_t0(double t0) const {
  PulseState s = *this;
  s.t0_ = t0;
  return s;
}

void StateBuilder::add(const ModeLabel& label, Complex amp) {
  if (!finite(amp)) {
    throw std::invalid_argument("non-finite amplitude for " + to_string(label));
  }
  if (label.p < 0) throw std::invalid_argument("ModeLabel: radial index p must be >= 0");
  amps_[label] += amp;
}

double StateBuilder::power() const {
  double p = 0.0;
  for (const auto& [label, amp] : amps_) p += norm2(amp);
  return p;
}

PulseState StateBuilder::finish(double* pruned) {
  double dropped = 0.0;
  for (auto it = amps_.begin(); it != amps_.end();) {
    if (norm2(it->second) < prune_threshold_) {
      dropped += norm2(it->second);
      it = amps_.erase(it);
    } else {
      ++it;
    }
  }
  if (pruned != nullptr) *pruned = dropped;

  PulseState s(t0_, prune_threshold_);
  s.amps_ = std::move(amps_);
  const double p = total_power(s);
  if (p > 1.0 + PulseState::kPowerTolerance) {
    throw std::invalid_argument("state power " + std::to_string(p) + " exceeds 1");
  }
  amps_.clear();
  return s;
}

PulseState superpose(std::span<const std::pair<ModeLabel, Complex>> terms, double t0,
                     double prune_threshold) {
  if (terms.empty()) throw std::invalid_argument("superpose: no terms");
  StateBuilder b(t0, prune_threshold);
  for (const auto& [label, amp] : terms) b.add(label, amp);
  return b.finish();
}

PulseState superpose(std::initializer_list<std::pair<ModeLabel, Complex>> terms, double t0) {
  std::vector<std::pair<ModeLabel, Complex>> v(terms);
  return superpose(std::span<const std::pair<ModeLabel, Complex>>(v), t0);
}

double total_power(const PulseState& s) {
  double p = 0.0;
  for (const auto& [label, amp] : s.terms()) p += norm2(amp);
  return p;
}

double power_in(const PulseState& s, const LabelPredicate& pred) {
  double p = 0.0;
  for (const auto& [label, amp] : s.terms()) {
    if (pred(label)) p += norm2(amp);
  }
  return p;
}

double power_in_bin(const PulseState& s, int bin) {
  return power_in(s, [bin](const ModeLabel& m) { return m.bin == bin; });
}

double power_in_charge(const PulseState& s, int l) {
  return power_in(s, [l](const ModeLabel& m) { return m.l == l; });
}

Complex overlap(const PulseState& a, const PulseState& b) {
  Complex acc(0.0, 0.0);
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  auto ia = ta.begin();
  auto ib = tb.begin();
  while (ia != ta.end() && ib != tb.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      acc += std::conj(ia->second) * ib->second;
      ++ia;
      ++ib;
    }
  }
  return acc;
}

PulseState normalized(const PulseState& s) {
  const double p = total_power(s);
  if (p <= 0.0) throw std::invalid_argument("normalized: empty state");
  const double inv = 1.0 / std::sqrt(p);
  StateBuilder b(s.t0(), s.prune_threshold());
  for (const auto& [label, amp] : s.terms()) b.add(label, amp * inv);
  return b.finish();
}

namespace {

int argmax_key(const PulseState& s, int ModeLabel::* key) {
  if (s.empty()) throw std::invalid_argument("argmax on empty state");
  std::map<int, double> marginal;
  for (const auto& [label, amp] : s.terms()) marginal[label.*key] += norm2(amp);
  int best = marginal.begin()->first;
  double best_p = marginal.begin()->second;
  for (const auto& [k, p] : marginal) {
    if (p > best_p) {
      best = k;
      best_p = p;
    }
  }
  return best;
}

}  // namespace

int argmax_bin(const PulseState& s) { return argmax_key(s, &ModeLabel::bin); }
int argmax_charge(const PulseState& s) { return argmax_key(s, &ModeLabel::l); }

std::string state_to_json(const PulseState& s) {
  nlohmann::json j;
  j["t0_ns"] = s.t0() * 1e9;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [label, amp] : s.terms()) {
    terms.push_back({{"pol", std::string(1, pol_char(label.pol))},
                     {"l", label.l},
                     {"p", label.p},
                     {"bin", label.bin},
                     {"re", amp.real()},
                     {"im", amp.imag()}});
  }
  j["terms"] = std::move(terms);
  return j.dump(2);
}

PulseState state_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("terms")) throw std::invalid_argument("state JSON: missing 'terms'");
  StateBuilder b(j.value("t0_ns", 0.0) * 1e-9);
  for (const auto& term : j.at("terms")) {
    const std::string pol = term.at("pol").get<std::string>();
    if (pol.size() != 1) throw std::invalid_argument("state JSON: bad 'pol' value");
    ModeLabel label{pol_from_char(pol[0]), term.at("l").get<int>(), term.at("p").get<int>(),
                    term.at("bin").get<int>()};
    b.add(label, Complex(term.at("re").get<double>(), term.at("im").get<double>()));
  }
  return b.finish();
}

}  // namespace stt
