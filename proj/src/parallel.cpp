#include "quantnoise/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace quantnoise {

void parallel_chunks(int count, int jobs, const std::function<void(int, int)>& fn) {
  if (count <= 0) return;
  jobs = std::clamp(jobs, 1, count);
  if (jobs == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  const int base = count / jobs;
  const int extra = count % jobs;
  int begin = 0;
  for (int w = 0; w < jobs; ++w) {
    const int len = base + (w < extra ? 1 : 0);
    const int end = begin + len;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
    begin = end;
  }
  for (auto& t : workers) t.join();
}

}  // namespace quantnoise
