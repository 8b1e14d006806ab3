#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace presym {

enum class VarKind { State = 0, Momentum = 1, Control = 2, ControlVelocity = 3, Parameter = 4 };

std::string_view to_string(VarKind kind);

/// A named symbol. Variables order by kind (states first) and then by name;
/// this order drives the monomial order of every canonical form.
struct Var {
  std::string name;
  VarKind kind = VarKind::Parameter;

  friend bool operator==(const Var& a, const Var& b) = default;
  friend std::strong_ordering operator<=>(const Var& a, const Var& b)
  {
    if (auto c = static_cast<int>(a.kind) <=> static_cast<int>(b.kind); c != 0) return c;
    return a.name.compare(b.name) <=> 0;
  }
};

inline Var state(std::string name) { return {std::move(name), VarKind::State}; }
inline Var momentum(std::string name) { return {std::move(name), VarKind::Momentum}; }
inline Var control(std::string name) { return {std::move(name), VarKind::Control}; }
inline Var control_velocity(std::string name) { return {std::move(name), VarKind::ControlVelocity}; }
inline Var parameter(std::string name) { return {std::move(name), VarKind::Parameter}; }

using VarSet = std::set<Var>;

/// Name -> variable lookup used by the parser and the file loaders.
class VarTable {
 public:
  /// Throws std::invalid_argument when the name is already taken.
  const Var& add(const Var& v);
  std::optional<Var> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }
  std::vector<Var> all() const;

 private:
  std::map<std::string, Var, std::less<>> vars_;
};

}  // namespace presym
