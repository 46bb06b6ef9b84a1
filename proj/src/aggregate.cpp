#include "subquad/aggregate.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace subquad {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

// ---- aggregate hardcore --------------------------------------------------------

namespace {

std::int64_t aggregate_aj_rec(SpinOracle& inst, double lambda, Vertex u, PinList lam,
                              std::int64_t N, const BinomialOracle& oracle, RngStream& rng,
                              AggregateStats* stats) {
  if (N == 0) return 0;
  if (stats) ++stats->recursive_calls;
  {
    std::optional<Spin> pin = lam.find(u);
    if (!pin) pin = inst.pinning(u);
    if (pin) return *pin == 1 ? N : 0;
  }
  std::int64_t X = oracle.sample(N, lambda / (1.0 + lambda), rng);
  if (stats) ++stats->binomial_draws;
  for (Vertex v : inst.neighbors(u)) {
    if (X == 0) break;
    std::optional<Spin> pin = lam.find(v);
    if (!pin) pin = inst.pinning(v);
    std::int64_t Y;
    if (pin) {
      Y = *pin == 1 ? X : 0;
    } else {
      Y = aggregate_aj_rec(inst, lambda, v, lam, X, oracle, rng, stats);
    }
    X -= Y;
    if (!pin) lam = lam.push(v, 0);
  }
  return X;
}

}  // namespace

std::int64_t aggregate_aj(SpinOracle& inst, double lambda, Vertex u, const PinList& unoccupied,
                          std::int64_t N, const BinomialOracle& oracle, RngStream& rng,
                          const SamplerOptions& opt, AggregateStats* stats) {
  if (N < 0) throw std::invalid_argument("negative sample count");
  if (!opt.override_regime && inst.max_degree() > 1 &&
      lambda >= 1.0 / (inst.max_degree() - 1.0)) {
    throw std::runtime_error("hardcore sampler regime: lambda >= 1/(Delta-1); pass override");
  }
  return aggregate_aj_rec(inst, lambda, u, unoccupied, N, oracle, rng, stats);
}

// ---- aggregate abstract ----------------------------------------------------------

namespace {

FrequencyVector multinomial_from_pmf(std::int64_t count, const std::vector<double>& pmf,
                                     const BinomialOracle& oracle, RngStream& rng,
                                     AggregateStats* stats) {
  FrequencyVector out;
  out.counts.assign(pmf.size(), 0);
  std::int64_t remaining = count;
  double mass = 1.0;
  for (std::size_t c = 0; c < pmf.size() && remaining > 0; ++c) {
    bool last = c + 1 == pmf.size();
    double cond = mass > 0.0 ? std::min(1.0, pmf[c] / mass) : 1.0;
    std::int64_t x = last ? remaining : oracle.sample(remaining, cond, rng);
    if (stats && !last) ++stats->binomial_draws;
    out.counts[c] = x;
    remaining -= x;
    mass -= pmf[c];
  }
  if (remaining > 0) out.counts.back() += remaining;
  return out;
}

FrequencyVector aggregate_ms_rec(SpinOracle& inst, const Scenario& sc, Vertex u, PinView view,
                                 std::int64_t N, const BinomialOracle& oracle, RngStream& rng,
                                 AggregateStats* stats) {
  const int q = sc.spin_count();
  FrequencyVector R;
  R.counts.assign(q, 0);
  if (N == 0) return R;
  if (stats) ++stats->recursive_calls;
  if (auto s = view.get(u)) {
    R.counts[*s] = N;
    return R;
  }
  auto plans = sc.draw_plan_batch(inst, u, view, N, oracle, rng);
  for (auto& [plan, Q] : plans) {
    std::vector<std::pair<PinView, std::int64_t>> branches{{view, Q}};
    for (Vertex v : plan.order) {
      std::vector<std::pair<PinView, std::int64_t>> next;
      for (auto& [tau, count] : branches) {
        FrequencyVector rec = aggregate_ms_rec(inst, sc, v, tau, count, oracle, rng, stats);
        auto cont = sc.continuation(inst, u, v, tau);
        for (int c = 0; c < q; ++c) {
          std::int64_t rc = rec.counts[c];
          if (rc == 0) continue;
          PinView tau2 = tau.get(v) ? tau : tau.with(v, c);
          bool continues = std::find(cont.begin(), cont.end(), c) != cont.end();
          if (continues) {
            next.emplace_back(tau2, rc);
          } else if (plan.on_early >= 0) {
            R.counts[plan.on_early] += rc;
          } else {
            auto pmf = sc.exit_pmf(inst, u, tau2, plan, EarlyExit{v, c});
            auto h = multinomial_from_pmf(rc, pmf, oracle, rng, stats);
            for (int d = 0; d < q; ++d) R.counts[d] += h.counts[d];
          }
        }
      }
      branches = std::move(next);
    }
    for (auto& [tau, count] : branches) {
      if (count == 0) continue;
      if (plan.on_complete >= 0) {
        R.counts[plan.on_complete] += count;
      } else {
        auto pmf = sc.exit_pmf(inst, u, tau, plan, std::nullopt);
        auto h = multinomial_from_pmf(count, pmf, oracle, rng, stats);
        for (int d = 0; d < q; ++d) R.counts[d] += h.counts[d];
      }
    }
  }
  assert(R.total() == N);  // conservation across exits
  return R;
}

}  // namespace

FrequencyVector aggregate_ms_abstract(SpinOracle& inst, const Scenario& sc, Vertex u,
                                      const PinView& view, std::int64_t N,
                                      const BinomialOracle& oracle, RngStream& rng,
                                      const SamplerOptions&, AggregateStats* stats) {
  if (N < 0) throw std::invalid_argument("negative sample count");
  return aggregate_ms_rec(inst, sc, u, view, N, oracle, rng, stats);
}

// ---- automaton engine ------------------------------------------------------------

std::map<std::string, std::int64_t> automaton_batch(const Automaton& a, std::int64_t N,
                                                    const BinomialOracle& oracle, RngStream& rng,
                                                    BatchStats* stats) {
  std::map<std::string, std::int64_t> out;
  if (N == 0) return out;
  std::int64_t cap = 1'000'000;
  if (auto d = a.decay()) {
    auto [C, alpha] = *d;
    double D = a.width_bound();
    double levels = 64.0 * std::log(std::max(2.0, C * static_cast<double>(N))) /
                    std::log(D / alpha);
    cap = static_cast<std::int64_t>(std::ceil(levels));
  }

  std::map<std::string, std::pair<AutomatonState, std::int64_t>> level;
  {
    AutomatonState init = a.initial();
    if (a.is_absorbing(init)) {
      out[a.absorb_label(init)] += N;
      return out;
    }
    level.emplace(init.key, std::make_pair(std::move(init), N));
  }

  for (std::int64_t step = 0; !level.empty(); ++step) {
    if (step > cap) throw LevelCapError();
    if (stats) stats->level_occupancy.push_back(static_cast<std::int64_t>(level.size()));
    std::map<std::string, std::pair<AutomatonState, std::int64_t>> next;
    for (auto& [key, entry] : level) {
      auto& [state, occ] = entry;
      auto succs = a.transitions(state);
      if (stats) ++stats->transitions;
      RngStream stream = rng.child(static_cast<std::uint64_t>(step), fnv1a(key));
      std::int64_t remaining = occ;
      double mass = 1.0;
      for (std::size_t i = 0; i < succs.size() && remaining > 0; ++i) {
        auto& [succ, p] = succs[i];
        bool last = i + 1 == succs.size();
        double cond = mass > 0.0 ? std::min(1.0, p / mass) : 1.0;
        std::int64_t c = last ? remaining : oracle.sample(remaining, cond, stream);
        remaining -= c;
        mass -= p;
        if (c == 0) continue;
        if (a.is_absorbing(succ)) {
          out[a.absorb_label(succ)] += c;
        } else {
          auto it = next.find(succ.key);
          if (it == next.end()) {
            next.emplace(succ.key, std::make_pair(std::move(succ), c));
          } else {
            it->second.second += c;
          }
        }
      }
    }
    level = std::move(next);
  }
  return out;
}

namespace {

std::string run_single_impl(const Automaton& a, const std::function<double()>& coin,
                            std::vector<std::string>* keys) {
  AutomatonState s = a.initial();
  for (std::int64_t guard = 0; guard < 100'000'000; ++guard) {
    if (keys) keys->push_back(s.key);
    if (a.is_absorbing(s)) return a.absorb_label(s);
    auto succs = a.transitions(s);
    if (succs.size() == 1) {
      s = std::move(succs[0].first);
      continue;
    }
    double u = coin();
    double acc = 0.0;
    bool taken = false;
    for (auto& [succ, p] : succs) {
      acc += p;
      if (u < acc) {
        s = std::move(succ);
        taken = true;
        break;
      }
    }
    if (!taken) s = std::move(succs.back().first);
  }
  throw RecursionBudgetError();
}

}  // namespace

std::string automaton_run_single(const Automaton& a, RngStream& rng,
                                 std::vector<std::string>* keys) {
  return run_single_impl(a, [&rng] { return rng.uniform(); }, keys);
}

std::string automaton_run_single(const Automaton& a, const std::function<double()>& tape,
                                 std::vector<std::string>* keys) {
  return run_single_impl(a, tape, keys);
}

// ---- hardcore automaton ------------------------------------------------------------

namespace {

// Persistent set of vertices pinned to 0 (the only pins the hardcore
// recursion creates).
struct AjPins {
  Vertex v;
  std::shared_ptr<const AjPins> next;
};

bool pins_member(const std::shared_ptr<const AjPins>& pins, Vertex v) {
  for (const AjPins* p = pins.get(); p != nullptr; p = p->next.get()) {
    if (p->v == v) return true;
  }
  return false;
}

std::shared_ptr<const AjPins> pins_push(std::shared_ptr<const AjPins> pins, Vertex v) {
  auto node = std::make_shared<AjPins>();
  node->v = v;
  node->next = std::move(pins);
  return node;
}

std::string pins_key(const std::shared_ptr<const AjPins>& pins) {
  std::vector<Vertex> vs;
  for (const AjPins* p = pins.get(); p != nullptr; p = p->next.get()) vs.push_back(p->v);
  std::sort(vs.begin(), vs.end());
  std::string s;
  for (Vertex v : vs) {
    s += std::to_string(v);
    s += ',';
  }
  return s;
}

enum class AjPhase { Init, Inspect, Hold, Halt };

struct AjFrame {
  Vertex w = -1;
  AjPhase phase = AjPhase::Init;
  std::shared_ptr<const AjPins> pins;  // entry pins for Init, current for Inspect/Hold
  Vertex hold_v = -1;
  int halt_sign = 0;
  std::shared_ptr<const AjFrame> below;
};

struct AjStateData {
  std::shared_ptr<const AjFrame> stack;  // empty + absorbed>=0 means done
  int absorbed = -1;
};

std::string aj_state_key(const AjStateData& d) {
  if (d.absorbed >= 0) return "!" + std::to_string(d.absorbed);
  std::string key;
  for (const AjFrame* f = d.stack.get(); f != nullptr; f = f->below.get()) {
    key += std::to_string(f->w);
    switch (f->phase) {
      case AjPhase::Init:
        key += "i[" + pins_key(f->pins) + "]";
        break;
      case AjPhase::Inspect:
        key += "s[" + pins_key(f->pins) + "]";
        break;
      case AjPhase::Hold:
        key += "h" + std::to_string(f->hold_v) + "[" + pins_key(f->pins) + "]";
        break;
      case AjPhase::Halt:
        key += "t" + std::to_string(f->halt_sign);
        break;
    }
    key += '|';
  }
  return key;
}

class AjAutomaton final : public Automaton {
 public:
  AjAutomaton(const Graph& g, double lambda, Vertex u, const Pinning& unoccupied)
      : g_(g), lambda_(lambda), root_(u) {
    for (auto [v, s] : unoccupied.entries()) {
      if (s != 0) throw std::invalid_argument("hardcore automaton accepts only 0-pins");
      base_ = pins_push(base_, v);
    }
  }

  AutomatonState initial() const override {
    auto frame = std::make_shared<AjFrame>();
    frame->w = root_;
    frame->phase = AjPhase::Init;
    frame->pins = base_;
    AjStateData d;
    d.stack = frame;
    return wrap(std::move(d));
  }

  bool is_absorbing(const AutomatonState& s) const override { return data(s).absorbed >= 0; }

  std::string absorb_label(const AutomatonState& s) const override {
    return std::to_string(data(s).absorbed);
  }

  int width_bound() const override { return 2; }

  std::optional<std::pair<double, double>> decay() const override {
    int Delta = g_.max_degree;
    if (Delta <= 1 || lambda_ >= 1.0 / (Delta - 1.0)) return std::nullopt;
    double c = 1.0 - lambda_ * (Delta - 1.0);
    double e = c * c / (4.0 * Delta * Delta);
    return std::make_pair(std::exp(e), std::exp(-e / 3.0));
  }

  std::vector<std::pair<AutomatonState, double>> transitions(
      const AutomatonState& st) const override {
    const AjStateData& d = data(st);
    const AjFrame& top = *d.stack;
    switch (top.phase) {
      case AjPhase::Init: {
        AjStateData halt = d;
        halt.stack = replace_top(d.stack, [](AjFrame& f) {
          f.phase = AjPhase::Halt;
          f.halt_sign = 0;
          f.pins = nullptr;
        });
        AjStateData inspect = d;
        inspect.stack = replace_top(d.stack, [](AjFrame& f) { f.phase = AjPhase::Inspect; });
        double oblivious = 1.0 / (1.0 + lambda_);
        return {{wrap(std::move(halt)), oblivious}, {wrap(std::move(inspect)), 1.0 - oblivious}};
      }
      case AjPhase::Inspect: {
        Vertex next_v = -1;
        for (Vertex v : g_.neighbors(top.w)) {
          if (!pins_member(top.pins, v)) {
            next_v = v;
            break;
          }
        }
        AjStateData nd = d;
        if (next_v < 0) {
          nd.stack = replace_top(d.stack, [](AjFrame& f) {
            f.phase = AjPhase::Halt;
            f.halt_sign = 1;
            f.pins = nullptr;
          });
        } else {
          auto held = replace_top(d.stack, [next_v](AjFrame& f) {
            f.phase = AjPhase::Hold;
            f.hold_v = next_v;
          });
          auto child = std::make_shared<AjFrame>();
          child->w = next_v;
          child->phase = AjPhase::Init;
          child->pins = top.pins;
          child->below = held;
          nd.stack = child;
        }
        return {{wrap(std::move(nd)), 1.0}};
      }
      case AjPhase::Hold:
        throw std::logic_error("hold frame can never be on top");
      case AjPhase::Halt: {
        AjStateData nd = d;
        int sgn = top.halt_sign;
        auto parent = top.below;
        if (!parent) {
          nd.stack = nullptr;
          nd.absorbed = sgn;
          return {{wrap(std::move(nd)), 1.0}};
        }
        nd.stack = replace_top(parent, [sgn](AjFrame& f) {
          if (sgn == 1) {
            f.phase = AjPhase::Halt;
            f.halt_sign = 0;
            f.pins = nullptr;
          } else {
            f.pins = pins_push(f.pins, f.hold_v);
            f.phase = AjPhase::Inspect;
          }
          f.hold_v = -1;
        });
        return {{wrap(std::move(nd)), 1.0}};
      }
    }
    throw std::logic_error("unreachable");
  }

 private:
  static const AjStateData& data(const AutomatonState& s) {
    return *static_cast<const AjStateData*>(s.payload.get());
  }

  static AutomatonState wrap(AjStateData d) {
    auto payload = std::make_shared<AjStateData>(std::move(d));
    AutomatonState s;
    s.key = aj_state_key(*payload);
    s.payload = std::move(payload);
    return s;
  }

  template <typename Fn>
  static std::shared_ptr<const AjFrame> replace_top(const std::shared_ptr<const AjFrame>& stack,
                                                    Fn&& fn) {
    auto top = std::make_shared<AjFrame>(*stack);
    fn(*top);
    return top;
  }

  const Graph& g_;
  double lambda_;
  Vertex root_;
  std::shared_ptr<const AjPins> base_;
};

}  // namespace

std::unique_ptr<Automaton> encode_aj_automaton(const Graph& g, double lambda, Vertex u,
                                               const Pinning& unoccupied) {
  return std::make_unique<AjAutomaton>(g, lambda, u, unoccupied);
}

// ---- hypergraph automaton -----------------------------------------------------------

namespace {

// Persistent time-indexed bit store for revealed coins and memo entries.
struct TimeBits {
  std::int64_t t;
  int val;
  std::shared_ptr<const TimeBits> next;
};

std::optional<int> bits_find(const std::shared_ptr<const TimeBits>& bits, std::int64_t t) {
  for (const TimeBits* p = bits.get(); p != nullptr; p = p->next.get()) {
    if (p->t == t) return p->val;
  }
  return std::nullopt;
}

std::shared_ptr<const TimeBits> bits_push(std::shared_ptr<const TimeBits> bits, std::int64_t t,
                                          int val) {
  auto node = std::make_shared<TimeBits>();
  node->t = t;
  node->val = val;
  node->next = std::move(bits);
  return node;
}

std::string bits_key(const std::shared_ptr<const TimeBits>& bits) {
  std::vector<std::pair<std::int64_t, int>> entries;
  for (const TimeBits* p = bits.get(); p != nullptr; p = p->next.get()) {
    entries.emplace_back(p->t, p->val);
  }
  std::sort(entries.begin(), entries.end());
  std::string s;
  for (auto [t, v] : entries) {
    s += std::to_string(t);
    s += v ? '+' : '-';
  }
  return s;
}

enum class HgMode { Entry, CheckCoins, Recurse, Await };

struct HgFrame {
  std::int64_t t = 0;
  HgMode mode = HgMode::Entry;
  int edge_pos = 0;
  int member_pos = 0;
  std::shared_ptr<const HgFrame> below;
};

struct HgStateData {
  std::shared_ptr<const HgFrame> stack;
  std::shared_ptr<const TimeBits> coins;
  std::shared_ptr<const TimeBits> memo;
  int absorbed = -1;
};

std::string hg_state_key(const HgStateData& d) {
  if (d.absorbed >= 0) return "!" + std::to_string(d.absorbed);
  std::string key;
  for (const HgFrame* f = d.stack.get(); f != nullptr; f = f->below.get()) {
    key += std::to_string(f->t) + "." + std::to_string(static_cast<int>(f->mode)) + "." +
           std::to_string(f->edge_pos) + "." + std::to_string(f->member_pos) + "|";
  }
  key += "C" + bits_key(d.coins) + "M" + bits_key(d.memo);
  return key;
}

class HypergraphAutomaton final : public Automaton {
 public:
  HypergraphAutomaton(const Hypergraph& h, Vertex v) : h_(h), root_(v) {}

  AutomatonState initial() const override {
    auto frame = std::make_shared<HgFrame>();
    frame->t = static_cast<std::int64_t>(root_) - h_.n;
    HgStateData d;
    d.stack = frame;
    return wrap(std::move(d));
  }

  bool is_absorbing(const AutomatonState& s) const override { return data(s).absorbed >= 0; }

  std::string absorb_label(const AutomatonState& s) const override {
    return std::to_string(data(s).absorbed);
  }

  int width_bound() const override { return 2; }

  std::optional<std::pair<double, double>> decay() const override {
    if (!hypergraph_in_regime(h_)) return std::nullopt;
    double k = h_.uniformity;
    double Delta = std::max(1, h_.max_degree);
    double scale = 3.0 * Delta * Delta * k * k * k * k;
    return std::make_pair(M_E, std::exp(-1.0 / scale));
  }

  std::vector<std::pair<AutomatonState, double>> transitions(
      const AutomatonState& st) const override {
    const HgStateData& d = data(st);
    const HgFrame& top = *d.stack;
    const std::int64_t t = top.t;
    const Vertex v = static_cast<Vertex>(((t % h_.n) + h_.n) % h_.n);
    const auto& incident = h_.incident_edges[v];

    switch (top.mode) {
      case HgMode::Entry: {
        if (auto m = bits_find(d.memo, t)) return {{pop_with(d, *m), 1.0}};
        auto coin = bits_find(d.coins, t);
        if (!coin) return reveal(d, t);
        if (*coin == 0) return {{return_value(d, t, 0), 1.0}};
        HgStateData nd = d;
        nd.stack = replace_top(d.stack, [](HgFrame& f) {
          f.mode = HgMode::CheckCoins;
          f.edge_pos = 0;
          f.member_pos = 0;
        });
        return {{wrap(std::move(nd)), 1.0}};
      }
      case HgMode::CheckCoins: {
        if (top.edge_pos == static_cast<int>(incident.size())) {
          return {{return_value(d, t, 1), 1.0}};
        }
        const auto& e = h_.edges[incident[top.edge_pos]];
        int mi = 0;
        std::int64_t member_time = 0;
        bool have_member = false;
        for (Vertex u : e) {
          if (u == v) continue;
          if (mi == top.member_pos) {
            member_time = prev_update_time(t, u, h_.n);
            have_member = true;
            break;
          }
          ++mi;
        }
        if (!have_member) {
          // All coins of this edge are 1; move to the resolve pass.
          HgStateData nd = d;
          nd.stack = replace_top(d.stack, [](HgFrame& f) {
            f.mode = HgMode::Recurse;
            f.member_pos = 0;
          });
          return {{wrap(std::move(nd)), 1.0}};
        }
        auto coin = bits_find(d.coins, member_time);
        if (!coin) return reveal(d, member_time);
        HgStateData nd = d;
        if (*coin == 0) {
          nd.stack = replace_top(d.stack, [](HgFrame& f) {
            ++f.edge_pos;
            f.member_pos = 0;
          });
        } else {
          nd.stack = replace_top(d.stack, [](HgFrame& f) { ++f.member_pos; });
        }
        return {{wrap(std::move(nd)), 1.0}};
      }
      case HgMode::Recurse:
      case HgMode::Await: {
        const auto& e = h_.edges[incident[top.edge_pos]];
        int mi = 0;
        std::int64_t member_time = 0;
        bool have_member = false;
        for (Vertex u : e) {
          if (u == v) continue;
          if (mi == top.member_pos) {
            member_time = prev_update_time(t, u, h_.n);
            have_member = true;
            break;
          }
          ++mi;
        }
        if (!have_member) {
          // Every member resolved to 1: the edge forces v to 0.
          return {{return_value(d, t, 0), 1.0}};
        }
        auto m = bits_find(d.memo, member_time);
        if (m) {
          HgStateData nd = d;
          if (*m == 1) {
            nd.stack = replace_top(d.stack, [](HgFrame& f) {
              f.mode = HgMode::Recurse;
              ++f.member_pos;
            });
          } else {
            nd.stack = replace_top(d.stack, [](HgFrame& f) {
              f.mode = HgMode::CheckCoins;
              ++f.edge_pos;
              f.member_pos = 0;
            });
          }
          return {{wrap(std::move(nd)), 1.0}};
        }
        if (top.mode == HgMode::Await) {
          throw std::logic_error("awaited child did not memoize its result");
        }
        HgStateData nd = d;
        auto held = replace_top(d.stack, [](HgFrame& f) { f.mode = HgMode::Await; });
        auto child = std::make_shared<HgFrame>();
        child->t = member_time;
        child->mode = HgMode::Entry;
        child->below = held;
        nd.stack = child;
        return {{wrap(std::move(nd)), 1.0}};
      }
    }
    throw std::logic_error("unreachable");
  }

 private:
  static const HgStateData& data(const AutomatonState& s) {
    return *static_cast<const HgStateData*>(s.payload.get());
  }

  static AutomatonState wrap(HgStateData d) {
    auto payload = std::make_shared<HgStateData>(std::move(d));
    AutomatonState s;
    s.key = hg_state_key(*payload);
    s.payload = std::move(payload);
    return s;
  }

  template <typename Fn>
  static std::shared_ptr<const HgFrame> replace_top(const std::shared_ptr<const HgFrame>& stack,
                                                    Fn&& fn) {
    auto top = std::make_shared<HgFrame>(*stack);
    fn(*top);
    return top;
  }

  // Two successors revealing the coin at time s.
  std::vector<std::pair<AutomatonState, double>> reveal(const HgStateData& d,
                                                        std::int64_t s) const {
    HgStateData zero = d;
    zero.coins = bits_push(d.coins, s, 0);
    HgStateData one = d;
    one.coins = bits_push(d.coins, s, 1);
    return {{wrap(std::move(zero)), 0.5}, {wrap(std::move(one)), 0.5}};
  }

  // Memoize Y_t = val, pop the frame, absorb if the stack empties.
  AutomatonState return_value(const HgStateData& d, std::int64_t t, int val) const {
    HgStateData nd = d;
    nd.memo = bits_push(d.memo, t, val);
    nd.stack = d.stack->below;
    if (!nd.stack) absorb(nd, val);
    return wrap(std::move(nd));
  }

  // Pop after a memo hit (no new memo entry).
  AutomatonState pop_with(const HgStateData& d, int val) const {
    HgStateData nd = d;
    nd.stack = d.stack->below;
    if (!nd.stack) absorb(nd, val);
    return wrap(std::move(nd));
  }

  static void absorb(HgStateData& d, int val) {
    d.absorbed = val;
    d.coins = nullptr;
    d.memo = nullptr;
  }

  const Hypergraph& h_;
  Vertex root_;
};

}  // namespace

std::unique_ptr<Automaton> encode_hypergraph_automaton(const Hypergraph& h, Vertex v) {
  return std::make_unique<HypergraphAutomaton>(h, v);
}

}  // namespace subquad
