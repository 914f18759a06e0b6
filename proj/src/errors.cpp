#include "dfsearch/errors.hpp"

namespace dfsearch {

int exit_code_for(const Error& e) noexcept {
  switch (e.category()) {
    case Error::Category::argument:
    case Error::Category::config:
      return 2;
    case Error::Category::capacity:
      return 3;
    case Error::Category::numerical:
      return 4;
  }
  return 1;
}

}  // namespace dfsearch
