#pragma once

// Weighted coalesced Tsetlin Machine.
//
// One pool of C conjunctive clauses is shared by all N classes. Class n scores
// an input as sum_c w_n[c] * clause_c(input), and the prediction is the argmax.
// Each clause owns one Tsetlin automaton per literal (2L of them, negations
// included); a literal is part of the clause while its automaton sits in the
// upper half of [1, ta_states].
//
// Polarity. The classic weighted TM splits each class's clauses into positive
// (odd, 1-based) and negative (even) polarity and branches its feedback table
// on (y, parity). In the coalesced pool every per-class weight is signed: the
// sign is the clause's polarity for that class, fixed at construction by clause
// parity (0-based even index = positive) and changed only by set_weight, while
// the magnitude |w| is learned by stochastic searching on the line with
// resolution 1, floored at 0. For a training row with true class y and a
// sampled contrast class y':
//   - class y, positive clause / class y', negative clause -> Type I branch:
//     a firing clause gets |w| += 1 plus Type Ia on 1-literals and Type Ib on
//     0-literals; a silent clause gets Type Ib on every literal;
//   - class y, negative clause / class y', positive clause -> Type II branch:
//     a firing clause gets |w| -= 1 (only if |w| > 0) plus Type II on excluded
//     0-literals; a silent clause is left alone.

#include <algorithm>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmbn/bits.hpp"
#include "tmbn/data.hpp"
#include "tmbn/errors.hpp"
#include "tmbn/random.hpp"

namespace tmbn {

struct TmParams {
  std::uint32_t clause_count = 20;
  std::uint32_t threshold = 10;
  double specificity = 3.9;
  std::uint32_t max_literals = 16;
  std::uint32_t ta_states = 256;
  std::uint32_t epochs = 10;

  void validate() const {
    if (clause_count == 0 || threshold == 0 || max_literals == 0 || epochs == 0)
      throw Error("TmParams: clause_count, threshold, max_literals and epochs must be positive");
    if (!(specificity > 1.0)) throw Error("TmParams: specificity must be > 1");
    if (ta_states < 2 || ta_states % 2 != 0 || ta_states > 65534) throw Error("TmParams: ta_states must be even and in [2, 65534]");
  }

  friend bool operator==(const TmParams&, const TmParams&) = default;
};

/// Clause evaluation convention for clauses with no included literals.
enum class Mode { Training, Inference };

enum class FeedbackKind : std::uint8_t { TypeIa, TypeIb, TypeII };
enum class FeedbackBranch : std::uint8_t { TypeI, TypeII };

inline const char* to_string(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::TypeIa: return "Ia";
    case FeedbackKind::TypeIb: return "Ib";
    case FeedbackKind::TypeII: return "II";
  }
  return "?";
}

struct LiteralDecision {
  std::uint32_t literal = 0;
  std::int8_t delta = 0;  // +1 toward include, -1 toward exclude
  friend bool operator==(const LiteralDecision&, const LiteralDecision&) = default;
};

/// Record of one clause receiving feedback. `kind` names the case taken:
/// Ia = Type I branch, clause fired (literal-level Ia on 1s, Ib on 0s);
/// Ib = Type I branch, clause silent; II = Type II branch, clause fired.
/// Weights are recorded as magnitudes.
struct FeedbackEvent {
  std::uint32_t clause = 0;
  FeedbackKind kind = FeedbackKind::TypeIa;
  std::uint32_t class_id = 0;
  bool weight_step = false;  // an SSL step was taken
  bool environment = false;  // SSL signal E (valid when weight_step)
  std::int32_t weight_before = 0;
  std::int32_t weight_after = 0;
  std::vector<LiteralDecision> literals;
};

/// One SSL move with resolution 1 on [0, inf): E = 1 steps up, E = 0 steps
/// down and stays put at zero.
inline std::int32_t update_weight_ssl(std::int32_t weight, bool environment) {
  if (weight < 0) throw std::invalid_argument("update_weight_ssl: weight must be non-negative");
  if (environment) return weight + 1;
  return weight > 0 ? weight - 1 : 0;
}

class Machine {
 public:
  Machine() = default;

  /// Automata start uniformly on either side of the include boundary;
  /// every weight starts at magnitude 1 with the clause's parity polarity.
  Machine(const TmParams& params, std::uint32_t literal_count, std::uint32_t class_count, std::uint64_t seed)
      : params_(params),
        literal_count_(literal_count),
        class_count_(class_count),
        seed_(seed),
        states_(std::size_t{params.clause_count} * literal_count),
        include_(params.clause_count, literal_count),
        included_(params.clause_count, 0),
        weights_(std::size_t{class_count} * params.clause_count, 1),
        polarity_(std::size_t{class_count} * params.clause_count, 1),
        rng_(seed) {
    params_.validate();
    if (literal_count < 2 || literal_count % 2 != 0) throw Error("Machine: literal count must be even and >= 2");
    if (class_count < 2) throw Error("Machine: at least two classes are required");
    const std::uint16_t mid = static_cast<std::uint16_t>(params_.ta_states / 2);
    for (std::uint32_t c = 0; c < clause_count(); ++c)
      for (std::uint32_t k = 0; k < literal_count_; ++k) set_state(c, k, static_cast<std::uint16_t>(mid + (rng_() & 1U)));
    for (std::uint32_t c = 0; c < clause_count(); ++c) enforce_max_literals(c);
    for (std::uint32_t n = 0; n < class_count_; ++n)
      for (std::uint32_t c = 1; c < clause_count(); c += 2) {
        polarity_[slot(n, c)] = -1;
        weights_[slot(n, c)] = -1;
      }
  }

  const TmParams& params() const { return params_; }
  std::uint32_t clause_count() const { return params_.clause_count; }
  std::uint32_t literal_count() const { return literal_count_; }
  std::uint32_t class_count() const { return class_count_; }
  std::uint64_t seed() const { return seed_; }

  std::uint16_t state(std::uint32_t clause, std::uint32_t literal) const { return states_[index(clause, literal)]; }
  bool included(std::uint32_t clause, std::uint32_t literal) const { return include_.get(clause, literal); }
  std::uint32_t included_count(std::uint32_t clause) const { return included_[clause]; }

  void set_state(std::uint32_t clause, std::uint32_t literal, std::uint16_t s) {
    if (s < 1 || s > params_.ta_states) throw std::out_of_range("automaton state outside [1, ta_states]");
    auto& cur = states_[index(clause, literal)];
    const bool was = cur > params_.ta_states / 2;
    const bool now = s > params_.ta_states / 2;
    cur = s;
    if (was != now) {
      include_.set(clause, literal, now);
      if (now)
        ++included_[clause];
      else
        --included_[clause];
    }
  }

  /// Signed weight of a clause for a class.
  std::int32_t weight(std::uint32_t class_id, std::uint32_t clause) const { return weights_[slot(class_id, clause)]; }
  std::int32_t magnitude(std::uint32_t class_id, std::uint32_t clause) const {
    const auto w = weight(class_id, clause);
    return w < 0 ? -w : w;
  }
  /// +1 or -1. A zero weight keeps the polarity it had.
  int polarity(std::uint32_t class_id, std::uint32_t clause) const { return polarity_[slot(class_id, clause)]; }

  /// Sets a signed weight; a non-zero value also fixes the polarity.
  void set_weight(std::uint32_t class_id, std::uint32_t clause, std::int32_t w) {
    weights_[slot(class_id, clause)] = w;
    if (w != 0) polarity_[slot(class_id, clause)] = static_cast<std::int8_t>(w > 0 ? 1 : -1);
  }
  void set_polarity(std::uint32_t class_id, std::uint32_t clause, int pol) {
    if (pol != 1 && pol != -1) throw std::invalid_argument("polarity must be +1 or -1");
    polarity_[slot(class_id, clause)] = static_cast<std::int8_t>(pol);
    weights_[slot(class_id, clause)] = pol * magnitude(class_id, clause);
  }
  void set_magnitude(std::uint32_t class_id, std::uint32_t clause, std::int32_t mag) {
    if (mag < 0) throw std::invalid_argument("weight magnitude must be non-negative");
    weights_[slot(class_id, clause)] = polarity(class_id, clause) * mag;
  }

  /// Conjunction of the included literals. An empty clause outputs 1 while
  /// training and 0 at inference.
  bool clause_output(std::uint32_t clause, std::span<const Word> input, Mode mode = Mode::Inference) const {
    if (included_[clause] == 0) return mode == Mode::Training;
    const auto mask = include_.row(clause);
    for (std::size_t w = 0; w < mask.size(); ++w)
      if (mask[w] & ~input[w]) return false;
    return true;
  }

  std::vector<std::int64_t> class_scores(std::span<const Word> input, Mode mode = Mode::Inference) const {
    std::vector<std::int64_t> scores(class_count_, 0);
    for (std::uint32_t c = 0; c < clause_count(); ++c)
      if (clause_output(c, input, mode))
        for (std::uint32_t n = 0; n < class_count_; ++n) scores[n] += weight(n, c);
    return scores;
  }

  /// Argmax of the inference scores; ties go to the lowest class id.
  std::uint32_t predict(std::span<const Word> input) const {
    auto s = class_scores(input);
    return static_cast<std::uint32_t>(std::max_element(s.begin(), s.end()) - s.begin());
  }

  /// Demotes the weakest included literals of a clause (lowest state, then
  /// lowest index) to the exclusion boundary until at most max_literals remain.
  void enforce_max_literals(std::uint32_t clause) {
    while (included_[clause] > params_.max_literals) {
      std::uint32_t weakest = literal_count_;
      for (std::uint32_t k = 0; k < literal_count_; ++k)
        if (included(clause, k) && (weakest == literal_count_ || state(clause, k) < state(clause, weakest))) weakest = k;
      set_state(clause, weakest, static_cast<std::uint16_t>(params_.ta_states / 2));
    }
  }

  void enforce_max_literals() {
    for (std::uint32_t c = 0; c < clause_count(); ++c) enforce_max_literals(c);
  }

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  friend bool operator==(const Machine& a, const Machine& b) {
    return a.params_ == b.params_ && a.literal_count_ == b.literal_count_ && a.class_count_ == b.class_count_ &&
           a.seed_ == b.seed_ && a.states_ == b.states_ && a.weights_ == b.weights_ && a.polarity_ == b.polarity_ &&
           a.rng_ == b.rng_;
  }

 private:
  std::size_t index(std::uint32_t clause, std::uint32_t literal) const { return std::size_t{clause} * literal_count_ + literal; }
  std::size_t slot(std::uint32_t class_id, std::uint32_t clause) const { return std::size_t{class_id} * params_.clause_count + clause; }

  TmParams params_;
  std::uint32_t literal_count_ = 0;
  std::uint32_t class_count_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint16_t> states_;
  BitMatrix include_;                   // derived from states_
  std::vector<std::uint32_t> included_;  // derived from states_
  std::vector<std::int32_t> weights_;
  std::vector<std::int8_t> polarity_;
  Rng rng_;
};

inline Machine new_machine(const TmParams& params, std::uint32_t literal_count, std::uint32_t class_count, std::uint64_t seed) {
  return Machine(params, literal_count, class_count, seed);
}

namespace detail {

inline void step_state(Machine& m, std::uint32_t clause, std::uint32_t k, int delta, std::vector<LiteralDecision>* log) {
  const int s = m.state(clause, k) + delta;
  if (s < 1 || s > static_cast<int>(m.params().ta_states)) return;
  m.set_state(clause, k, static_cast<std::uint16_t>(s));
  if (log) log->push_back({k, static_cast<std::int8_t>(delta)});
}

}  // namespace detail

/// Applies one clause's feedback for one training row. `fired` is the clause
/// output (training convention) computed before any update for this row.
/// Fills `record` when given; a silent clause on the Type II branch is left
/// untouched and records nothing.
inline void apply_feedback(Machine& m, std::uint32_t clause, std::uint32_t class_id, FeedbackBranch branch,
                           std::span<const Word> input, bool fired, FeedbackEvent* record = nullptr) {
  std::vector<LiteralDecision>* log = record ? &record->literals : nullptr;
  const std::int32_t before = m.magnitude(class_id, clause);
  ChunkedBernoulli trial(m.rng());
  const double s = m.params().specificity;
  const std::uint32_t strengthen = ChunkedBernoulli::limit((s - 1.0) / s);
  const std::uint32_t weaken = ChunkedBernoulli::limit(1.0 / s);
  FeedbackKind kind{};
  bool step = false;
  bool env = false;

  if (branch == FeedbackBranch::TypeI) {
    if (fired) {
      kind = FeedbackKind::TypeIa;
      step = true;
      env = true;
      m.set_magnitude(class_id, clause, update_weight_ssl(before, true));
      for (std::uint32_t k = 0; k < m.literal_count(); ++k) {
        if (test_bit(input, k)) {
          if (trial(strengthen)) detail::step_state(m, clause, k, +1, log);
        } else if (trial(weaken)) {
          detail::step_state(m, clause, k, -1, log);
        }
      }
      m.enforce_max_literals(clause);
    } else {
      kind = FeedbackKind::TypeIb;
      for (std::uint32_t k = 0; k < m.literal_count(); ++k)
        if (trial(weaken)) detail::step_state(m, clause, k, -1, log);
    }
  } else {
    if (!fired) return;  // inaction
    kind = FeedbackKind::TypeII;
    step = true;
    env = false;
    m.set_magnitude(class_id, clause, update_weight_ssl(before, false));
    for (std::uint32_t k = 0; k < m.literal_count(); ++k)
      if (!test_bit(input, k) && !m.included(clause, k)) detail::step_state(m, clause, k, +1, log);
    m.enforce_max_literals(clause);
  }

  if (record) {
    record->clause = clause;
    record->kind = kind;
    record->class_id = class_id;
    record->weight_step = step;
    record->environment = env;
    record->weight_before = before;
    record->weight_after = m.magnitude(class_id, clause);
  }
}

/// Feeds one labelled row through the machine. For the true class y, clause c
/// is selected with probability (T - clamp(score_y)) / 2T; for a uniformly
/// drawn other class y', with probability (T + clamp(score_y')) / 2T. The
/// clause's polarity for that class picks the Type I or Type II branch.
inline void train_row(Machine& m, std::span<const Word> input, std::uint32_t label, std::vector<FeedbackEvent>* trace = nullptr) {
  if (label >= m.class_count()) throw Error("train_row: label outside the machine's classes");
  Rng& rng = m.rng();
  const auto T = static_cast<std::int64_t>(m.params().threshold);
  std::uint32_t contrast = static_cast<std::uint32_t>(uniform_below(rng, m.class_count() - 1));
  if (contrast >= label) ++contrast;

  const std::uint32_t C = m.clause_count();
  thread_local std::vector<std::uint8_t> fired;
  fired.assign(C, 0);
  std::int64_t score_y = 0, score_c = 0;
  for (std::uint32_t c = 0; c < C; ++c) {
    fired[c] = m.clause_output(c, input, Mode::Training);
    if (fired[c]) {
      score_y += m.weight(label, c);
      score_c += m.weight(contrast, c);
    }
  }
  const std::uint32_t pick_target = ChunkedBernoulli::limit(static_cast<double>(T - std::clamp(score_y, -T, T)) / static_cast<double>(2 * T));
  const std::uint32_t pick_contrast = ChunkedBernoulli::limit(static_cast<double>(T + std::clamp(score_c, -T, T)) / static_cast<double>(2 * T));
  ChunkedBernoulli trial(rng);

  auto feed = [&](std::uint32_t c, std::uint32_t cls, FeedbackBranch branch) {
    if (!trace) {
      apply_feedback(m, c, cls, branch, input, fired[c]);
      return;
    }
    FeedbackEvent ev;
    apply_feedback(m, c, cls, branch, input, fired[c], &ev);
    if (branch == FeedbackBranch::TypeI || fired[c]) trace->push_back(std::move(ev));
  };
  for (std::uint32_t c = 0; c < C; ++c) {
    if (trial(pick_target))
      feed(c, label, m.polarity(label, c) > 0 ? FeedbackBranch::TypeI : FeedbackBranch::TypeII);
    if (trial(pick_contrast))
      feed(c, contrast, m.polarity(contrast, c) > 0 ? FeedbackBranch::TypeII : FeedbackBranch::TypeI);
  }
}

/// One pass over the training set in stored order.
inline void train_epoch(Machine& m, const TrainingSet& data) {
  for (std::size_t r = 0; r < data.inputs.rows(); ++r) train_row(m, data.inputs.row(r), data.labels[r]);
}

/// As train_epoch, returning every feedback event in application order.
inline std::vector<FeedbackEvent> train_epoch_traced(Machine& m, const TrainingSet& data) {
  std::vector<FeedbackEvent> trace;
  for (std::size_t r = 0; r < data.inputs.rows(); ++r) train_row(m, data.inputs.row(r), data.labels[r], &trace);
  return trace;
}

inline void train(Machine& m, const TrainingSet& data, std::uint32_t epochs) {
  for (std::uint32_t e = 0; e < epochs; ++e) train_epoch(m, data);
}

inline double accuracy(const Machine& m, const TrainingSet& data) {
  if (data.inputs.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < data.inputs.rows(); ++r) hits += m.predict(data.inputs.row(r)) == data.labels[r];
  return static_cast<double>(hits) / static_cast<double>(data.inputs.rows());
}

/// Draws a random parameterization for data with L literals (negations not
/// counted): clauses in [L, 3L], threshold in [10, clauses] (or [1, clauses]
/// when clauses < 10), specificity in [5, 15], max literals in [3, L].
inline TmParams random_params(std::uint32_t total_literals, std::uint64_t seed, std::uint32_t epochs = 10) {
  if (total_literals < 4) throw Error("random_params: need at least 4 literals");
  Rng rng(seed);
  TmParams p;
  const auto L = static_cast<std::int64_t>(total_literals);
  p.clause_count = static_cast<std::uint32_t>(uniform_int(rng, L, 3 * L));
  const std::int64_t lo = p.clause_count >= 10 ? 10 : 1;
  p.threshold = static_cast<std::uint32_t>(uniform_int(rng, lo, p.clause_count));
  p.specificity = uniform_real(rng, 5.0, 15.0);
  p.max_literals = static_cast<std::uint32_t>(uniform_int(rng, 3, L));
  p.epochs = epochs;
  return p;
}

// ---------------------------------------------------------------------------
// Versioned JSON document. The generator state is stored in the standard
// library's textual form, so a reloaded machine continues the same stream.

inline nlohmann::json to_json(const TmParams& p) {
  return {{"clause_count", p.clause_count}, {"threshold", p.threshold},   {"specificity", p.specificity},
          {"max_literals", p.max_literals}, {"ta_states", p.ta_states},   {"epochs", p.epochs}};
}

inline TmParams params_from_json(const nlohmann::json& j) {
  TmParams p;
  p.clause_count = j.at("clause_count").get<std::uint32_t>();
  p.threshold = j.at("threshold").get<std::uint32_t>();
  p.specificity = j.at("specificity").get<double>();
  p.max_literals = j.at("max_literals").get<std::uint32_t>();
  p.ta_states = j.value("ta_states", 256U);
  p.epochs = j.value("epochs", 10U);
  p.validate();
  return p;
}

inline nlohmann::json to_json(const Machine& m) {
  nlohmann::json j;
  j["format"] = "tmbn-machine";
  j["version"] = 1;
  j["params"] = to_json(m.params());
  j["literal_count"] = m.literal_count();
  j["class_count"] = m.class_count();
  j["seed"] = m.seed();
  auto& automata = j["automata"] = nlohmann::json::array();
  for (std::uint32_t c = 0; c < m.clause_count(); ++c) {
    std::vector<std::uint16_t> row(m.literal_count());
    for (std::uint32_t k = 0; k < m.literal_count(); ++k) row[k] = m.state(c, k);
    automata.push_back(row);
  }
  auto& weights = j["weights"] = nlohmann::json::array();
  for (std::uint32_t n = 0; n < m.class_count(); ++n) {
    std::vector<std::int32_t> row(m.clause_count());
    for (std::uint32_t c = 0; c < m.clause_count(); ++c) row[c] = m.weight(n, c);
    weights.push_back(row);
  }
  auto& polarity = j["polarity"] = nlohmann::json::array();
  for (std::uint32_t n = 0; n < m.class_count(); ++n) {
    std::vector<int> row(m.clause_count());
    for (std::uint32_t c = 0; c < m.clause_count(); ++c) row[c] = m.polarity(n, c);
    polarity.push_back(row);
  }
  std::ostringstream rs;
  rs << m.rng();
  j["rng_state"] = rs.str();
  return j;
}

inline Machine machine_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "tmbn-machine" || j.value("version", 0) != 1) throw Error("not a tmbn-machine v1 document");
  const TmParams p = params_from_json(j.at("params"));
  Machine m(p, j.at("literal_count").get<std::uint32_t>(), j.at("class_count").get<std::uint32_t>(), j.at("seed").get<std::uint64_t>());
  const auto& automata = j.at("automata");
  if (automata.size() != m.clause_count()) throw Error("machine document: automata row count mismatch");
  for (std::uint32_t c = 0; c < m.clause_count(); ++c) {
    const auto& row = automata[c];
    if (row.size() != m.literal_count()) throw Error("machine document: automata width mismatch");
    for (std::uint32_t k = 0; k < m.literal_count(); ++k) m.set_state(c, k, row[k].get<std::uint16_t>());
  }
  const auto& weights = j.at("weights");
  if (weights.size() != m.class_count()) throw Error("machine document: weight row count mismatch");
  for (std::uint32_t n = 0; n < m.class_count(); ++n) {
    if (weights[n].size() != m.clause_count()) throw Error("machine document: weight width mismatch");
    for (std::uint32_t c = 0; c < m.clause_count(); ++c) m.set_weight(n, c, weights[n][c].get<std::int32_t>());
  }
  const auto& polarity = j.at("polarity");
  if (polarity.size() != m.class_count()) throw Error("machine document: polarity row count mismatch");
  for (std::uint32_t n = 0; n < m.class_count(); ++n) {
    if (polarity[n].size() != m.clause_count()) throw Error("machine document: polarity width mismatch");
    for (std::uint32_t c = 0; c < m.clause_count(); ++c) m.set_polarity(n, c, polarity[n][c].get<int>());
  }
  std::istringstream rs(j.at("rng_state").get<std::string>());
  rs >> m.rng();
  if (!rs) throw Error("machine document: unreadable rng_state");
  return m;
}

}  // namespace tmbn
