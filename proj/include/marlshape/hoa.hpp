#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Reader/writer for a subset of the HOA v1 automaton format:
//   - exactly one start state,
//   - acceptance "1 Inf(0)" (one transition-based Buchi set),
//   - explicit edge labels (no implicit labels, no aliases, no alternation),
//   - acceptance marks on transitions only.
//
// Epsilon moves have no native HOA encoding. Convention: an atomic
// proposition named "__eps__" may be declared as the last AP; an edge whose
// label is exactly that bare atom is an epsilon move. The automaton loader
// strips "__eps__" from the alphabet.

namespace marlshape::hoa {

inline constexpr std::string_view kEpsilonAp = "__eps__";
inline constexpr int kMaxAps = 16;

// Set of atomic propositions, one bit per AP index.
using LabelMask = std::uint32_t;

enum class GuardKind { True, False, Ap, Not, And, Or };

// Immutable boolean formula tree over AP indices.
struct Guard {
  GuardKind kind = GuardKind::True;
  int ap = -1;
  std::shared_ptr<const Guard> lhs;
  std::shared_ptr<const Guard> rhs;
};

using GuardPtr = std::shared_ptr<const Guard>;

GuardPtr guard_true();
GuardPtr guard_false();
GuardPtr guard_ap(int ap_index);
GuardPtr guard_not(GuardPtr g);
GuardPtr guard_and(GuardPtr a, GuardPtr b);
GuardPtr guard_or(GuardPtr a, GuardPtr b);

bool eval_guard(const Guard& g, LabelMask labels);
bool guards_equal(const Guard& a, const Guard& b);
std::string guard_to_string(const Guard& g);
// Largest AP index mentioned, or -1 for constant guards.
int max_ap_index(const Guard& g);

struct HoaTransition {
  GuardPtr guard;
  int target = 0;
  std::vector<int> acc_sets;  // subset of {0} in this artifact

  bool in_buchi_set() const;
};

struct HoaState {
  std::vector<HoaTransition> transitions;
};

struct HoaDocument {
  std::optional<std::string> name;
  int num_states = 0;
  int start_state = 0;
  std::vector<std::string> ap_names;
  std::string acceptance = "1 Inf(0)";  // canonical form, subset-checked
  std::vector<HoaState> states;

  int num_aps() const { return static_cast<int>(ap_names.size()); }
};

bool operator==(const HoaTransition& a, const HoaTransition& b);
bool operator==(const HoaState& a, const HoaState& b);
bool operator==(const HoaDocument& a, const HoaDocument& b);

struct HoaError : std::runtime_error {
  int line = 0;
  int column = 0;
  HoaError(const std::string& msg, int line_, int col_);
};

// Input is syntactically malformed.
struct HoaSyntaxError : HoaError {
  using HoaError::HoaError;
};
// Input is valid HOA but outside the supported subset.
struct HoaUnsupportedError : HoaError {
  using HoaError::HoaError;
};
// Indices out of range, duplicate state blocks, and similar.
struct HoaSemanticError : HoaError {
  using HoaError::HoaError;
};

HoaDocument parse_hoa(std::string_view text);
std::string serialize_hoa(const HoaDocument& doc);

}  // namespace marlshape::hoa
