// SPDX-License-Identifier: Apache-2.0
#include "program_gen.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

namespace hlsdbg::testing {

namespace {

class Gen {
 public:
  Gen(uint64_t seed, const GenOptions& opts) : rng_(seed), opts_(opts) {}

  std::string program() {
    int helpers = pick(0, opts_.maxHelpers);
    for (int h = 0; h < helpers; ++h) function("h" + std::to_string(h), h, pick(1, 2));
    function("main", helpers, 0);
    return out_.str();
  }

 private:
  struct Array {
    std::string name;
    int length;
  };

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(int percent) { return pick(1, 100) <= percent; }

  void line(const std::string& s) { out_ << std::string(static_cast<size_t>(indent_ * 2), ' ') << s << '\n'; }

  void function(const std::string& name, int callable, int params) {
    scalars_.clear();
    arrays_.clear();
    callable_ = callable;
    arity_.push_back(params);
    counter_ = 0;
    std::string sig = "int " + name + "(";
    for (int p = 0; p < params; ++p) {
      std::string pn = "p" + std::to_string(p);
      sig += (p ? ", int " : "int ") + pn;
      scalars_.push_back(pn);
    }
    line(sig + ") {");
    ++indent_;
    for (int i = 0, n = pick(1, 3); i < n; ++i) declScalar();
    if (opts_.arrays && chance(50)) {
      Array a{"a" + std::to_string(counter_++), pick(1, 8)};
      line("int " + a.name + "[" + std::to_string(a.length) + "];");
      arrays_.push_back(a);
    }
    block(0);
    line("return " + expr(2) + ";");
    --indent_;
    line("}");
  }

  void declScalar() {
    std::string n = "v" + std::to_string(counter_++);
    line("int " + n + " = " + expr(2) + ";");
    scalars_.push_back(n);
  }

  void block(int depth) {
    size_t scope = scalars_.size();
    for (int i = 0, n = pick(1, opts_.maxStmtsPerBlock); i < n; ++i) stmt(depth);
    scalars_.resize(scope);
  }

  std::string assignable() {
    std::vector<std::string> ok;
    for (const auto& s : scalars_)
      if (!frozen(s)) ok.push_back(s);
    if (ok.empty()) return {};
    return ok[static_cast<size_t>(pick(0, static_cast<int>(ok.size()) - 1))];
  }

  bool frozen(const std::string& s) const {
    for (const auto& f : frozen_)
      if (f == s) return true;
    return false;
  }

  void stmt(int depth) {
    int kind = pick(0, depth >= opts_.maxDepth ? 2 : 6);
    switch (kind) {
      case 0: declScalar(); return;
      case 1:
      case 2: {
        if (!arrays_.empty() && chance(40)) {
          const Array& a = arrays_[static_cast<size_t>(pick(0, static_cast<int>(arrays_.size()) - 1))];
          line(a.name + "[" + safeIndex(a) + "] = " + expr(2) + ";");
          return;
        }
        std::string v = assignable();
        if (v.empty()) return declScalar();
        line(v + " = " + expr(3) + ";");
        return;
      }
      case 3:
      case 4: {
        line("if (" + expr(2) + ") {");
        nested(depth);
        if (chance(50)) {
          line("} else {");
          nested(depth);
        }
        line("}");
        return;
      }
      case 5: {
        int trips = pick(0, tripCap());
        if (trips < 0) return declScalar();
        std::string iv = "i" + std::to_string(counter_++);
        int lo = pick(-2, 3);
        int stride = pick(1, 2);
        line("for (int " + iv + " = " + std::to_string(lo) + "; " + iv + " < " +
             std::to_string(lo + trips * stride) + "; " + iv + " = " + iv + " + " +
             std::to_string(stride) + ") {");
        frozen_.push_back(iv);
        scalars_.push_back(iv);
        loopNested(depth, trips);
        scalars_.pop_back();
        frozen_.pop_back();
        line("}");
        return;
      }
      default: {
        int trips = tripCap() < 0 ? -1 : pick(0, tripCap());
        if (trips < 0) return declScalar();
        std::string w = "w" + std::to_string(counter_++);
        line("int " + w + " = 0;");
        line("while (" + w + " < " + std::to_string(trips) + ") {");
        frozen_.push_back(w);
        loopNested(depth, trips);
        ++indent_;
        line(w + " = " + w + " + 1;");
        --indent_;
        frozen_.pop_back();
        line("}");
        scalars_.push_back(w);
        return;
      }
    }
  }

  void nested(int depth) {
    ++indent_;
    block(depth + 1);
    --indent_;
  }

  // Largest trip count that keeps the dynamic iteration product bounded;
  // -1 when no further loop fits.
  int tripCap() const {
    int cap = std::min(opts_.maxTrip, kIterationBudget / weight_);
    return cap < 1 ? -1 : cap;
  }

  void loopNested(int depth, int trips) {
    int saved = weight_;
    weight_ *= std::max(trips, 1);
    nested(depth);
    weight_ = saved;
  }

  std::string safeIndex(const Array& a) {
    std::string k = std::to_string(a.length);
    return "((" + expr(1) + ") % " + k + " + " + k + ") % " + k;
  }

  std::string expr(int depth) {
    int kind = pick(0, depth <= 0 ? 1 : 9);
    switch (kind) {
      case 0: return std::to_string(pick(-20, 100));
      case 1:
        if (scalars_.empty()) return std::to_string(pick(0, 9));
        return scalars_[static_cast<size_t>(pick(0, static_cast<int>(scalars_.size()) - 1))];
      case 2: {
        if (arrays_.empty()) return expr(depth - 1);
        const Array& a = arrays_[static_cast<size_t>(pick(0, static_cast<int>(arrays_.size()) - 1))];
        return a.name + "[" + safeIndex(a) + "]";
      }
      case 3: {
        if (callable_ == 0 || weight_ > 4 || !chance(60)) return expr(depth - 1);
        int h = pick(0, callable_ - 1);
        std::string s = "h" + std::to_string(h) + "(";
        for (int i = 0; i < arity_[static_cast<size_t>(h)]; ++i) s += (i ? ", " : "") + expr(depth - 1);
        return s + ")";
      }
      case 4: {
        const char* op = chance(50) ? "/" : "%";
        return "(" + expr(depth - 1) + " " + op + " ((" + expr(depth - 1) + ") % 7 + 8))";
      }
      case 5: {
        static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
        return "(" + expr(depth - 1) + " " + ops[pick(0, 5)] + " " + expr(depth - 1) + ")";
      }
      case 6: return "(" + expr(depth - 1) + (chance(50) ? " && " : " || ") + expr(depth - 1) + ")";
      case 7: return (chance(50) ? "-" : "!") + std::string("(") + expr(depth - 1) + ")";
      default: {
        static const char* ops[] = {"+", "-", "*"};
        return "(" + expr(depth - 1) + " " + ops[pick(0, 2)] + " " + expr(depth - 1) + ")";
      }
    }
  }

  static constexpr int kIterationBudget = 64;

  std::mt19937_64 rng_;
  GenOptions opts_;
  std::ostringstream out_;
  int indent_ = 0;
  int counter_ = 0;
  int callable_ = 0;
  int weight_ = 1;
  std::vector<int> arity_;
  std::vector<std::string> scalars_;
  std::vector<std::string> frozen_;
  std::vector<Array> arrays_;
};

}  // namespace

std::string generateProgram(uint64_t seed, const GenOptions& opts) {
  return Gen(seed, opts).program();
}

}  // namespace hlsdbg::testing
