#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nsf {

struct VerifyRow {
  std::string suite;
  std::string check;
  bool passed = false;
  double value = 0.0;  // observed worst value
  double limit = 0.0;
  std::string note;
};

struct VerifyOptions {
  int samples = 10000;
  bool inject_broken_law = false;  // adds S = -D to the law suite
};

std::vector<VerifyRow> verify_laws(const VerifyOptions& opts = {});
std::vector<VerifyRow> verify_truncation(const VerifyOptions& opts = {});
std::vector<VerifyRow> verify_basis(const VerifyOptions& opts = {});

/// scope: all | laws | truncation | basis. Throws ConfigError on anything else.
std::vector<VerifyRow> verify_scope(const std::string& scope, const VerifyOptions& opts = {});

void print_verify_table(std::ostream& out, const std::vector<VerifyRow>& rows);
bool all_passed(const std::vector<VerifyRow>& rows);

}  // namespace nsf
