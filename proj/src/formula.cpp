#include "cohref/formula.hpp"

#include <cctype>

#include "cohref/errors.hpp"

namespace cohref {

Formula::Formula(Kind k, std::string label, std::shared_ptr<const Formula> l,
                 std::shared_ptr<const Formula> r)
    : kind_(k), label_(std::move(label)), left_(std::move(l)), right_(std::move(r)) {}

Formula Formula::atom(std::string label) {
  if (label.empty()) throw ValidationError("atom label must be nonempty");
  return Formula(Kind::Atom, std::move(label), nullptr, nullptr);
}

Formula Formula::conj(Formula a, Formula b) {
  return Formula(Kind::And, {}, std::make_shared<const Formula>(std::move(a)),
                 std::make_shared<const Formula>(std::move(b)));
}

Formula Formula::disj(Formula a, Formula b) {
  return Formula(Kind::Or, {}, std::make_shared<const Formula>(std::move(a)),
                 std::make_shared<const Formula>(std::move(b)));
}

Formula Formula::negate(Formula f) {
  return Formula(Kind::Not, {}, std::make_shared<const Formula>(std::move(f)), nullptr);
}

Formula Formula::conj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) throw ValidationError("conjunction of an empty list");
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
  return acc;
}

const std::string& Formula::label() const {
  if (kind_ != Kind::Atom) throw ValidationError("label() on a non-atom formula");
  return label_;
}

const Formula& Formula::left() const {
  if (!left_) throw ValidationError("left() on an atom");
  return *left_;
}

const Formula& Formula::right() const {
  if (!right_) throw ValidationError("right() on an atom or negation");
  return *right_;
}

void Formula::collect_atoms(std::set<std::string>& out) const {
  if (kind_ == Kind::Atom) {
    out.insert(label_);
    return;
  }
  left_->collect_atoms(out);
  if (right_) right_->collect_atoms(out);
}

std::vector<std::string> Formula::atoms() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto walk = [&](auto& self, const Formula& f) -> void {
    if (f.kind_ == Kind::Atom) {
      if (seen.insert(f.label_).second) out.push_back(f.label_);
      return;
    }
    self(self, *f.left_);
    if (f.right_) self(self, *f.right_);
  };
  walk(walk, *this);
  return out;
}

std::string Formula::to_string() const {
  switch (kind_) {
    case Kind::Atom:
      return "atom(" + label_ + ")";
    case Kind::And:
      return "and(" + left_->to_string() + ", " + right_->to_string() + ")";
    case Kind::Or:
      return "or(" + left_->to_string() + ", " + right_->to_string() + ")";
    case Kind::Not:
      return "not(" + left_->to_string() + ")";
  }
  return {};
}

bool Formula::operator==(const Formula& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::Atom:
      return label_ == o.label_;
    case Kind::Not:
      return *left_ == *o.left_;
    default:
      return *left_ == *o.left_ && *right_ == *o.right_;
  }
}

namespace {

class FormulaReader {
 public:
  explicit FormulaReader(const std::string& s) : s_(s) {}

  Formula read() {
    Formula f = term();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return f;
  }

 private:
  Formula term() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string head = s_.substr(start, pos_ - start);
    expect('(');
    if (head == "atom") {
      std::size_t close = s_.find(')', pos_);
      if (close == std::string::npos) fail("unterminated atom");
      std::string label = s_.substr(pos_, close - pos_);
      pos_ = close + 1;
      return Formula::atom(label);
    }
    if (head == "not") {
      Formula f = term();
      expect(')');
      return Formula::negate(f);
    }
    if (head == "and" || head == "or") {
      Formula a = term();
      expect(',');
      Formula b = term();
      expect(')');
      return head == "and" ? Formula::conj(a, b) : Formula::disj(a, b);
    }
    fail("unknown connective '" + head + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) {
    throw FormatError("bad formula '" + s_ + "': " + why);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

void flatten_and(const Formula& f, std::vector<Formula>& out) {
  if (f.kind() == Formula::Kind::And) {
    flatten_and(f.left(), out);
    flatten_and(f.right(), out);
  } else {
    out.push_back(f);
  }
}

}  // namespace

Formula parse_formula(const std::string& text) { return FormulaReader(text).read(); }

SplitDescription split_negations(const Formula& f) {
  std::vector<Formula> conjuncts;
  flatten_and(f, conjuncts);
  SplitDescription out;
  std::vector<Formula> positive;
  for (const auto& c : conjuncts) {
    if (c.kind() == Formula::Kind::Not) {
      out.excluded.push_back(c.left());
    } else {
      positive.push_back(c);
    }
  }
  if (!positive.empty()) out.positive = Formula::conj_all(positive);
  return out;
}

}  // namespace cohref
