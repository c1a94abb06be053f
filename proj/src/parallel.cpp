#include "growcut/parallel.hpp"

#include <algorithm>

namespace growcut {

int resolve_workers(int requested)
{
    if (requested <= 0) {
        return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    }
    return requested;
}

WorkerPool::WorkerPool(int workers)
{
    const int extra = std::max(1, workers) - 1;
    threads_.reserve(static_cast<std::size_t>(extra));
    for (int i = 0; i < extra; ++i) {
        threads_.emplace_back([this] { worker_loop(); });
    }
}

WorkerPool::~WorkerPool()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) {
        t.join();
    }
}

void WorkerPool::drain()
{
    std::unique_lock lock(mutex_);
    while (next_task_ < task_count_) {
        const std::size_t task = next_task_++;
        const auto* job = job_;
        lock.unlock();
        try {
            (*job)(task);
        } catch (...) {
            lock.lock();
            if (!error_) {
                error_ = std::current_exception();
            }
            ++finished_;
            continue;
        }
        lock.lock();
        ++finished_;
    }
    if (finished_ == task_count_) {
        done_.notify_all();
    }
}

void WorkerPool::worker_loop()
{
    std::size_t seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) {
                return;
            }
            seen = generation_;
        }
        drain();
    }
}

void WorkerPool::run(std::size_t tasks, const std::function<void(std::size_t)>& fn)
{
    if (tasks == 0) {
        return;
    }
    if (threads_.empty() || tasks == 1) {
        for (std::size_t t = 0; t < tasks; ++t) {
            fn(t);
        }
        return;
    }
    {
        std::lock_guard lock(mutex_);
        job_ = &fn;
        next_task_ = 0;
        task_count_ = tasks;
        finished_ = 0;
        error_ = nullptr;
        ++generation_;
    }
    wake_.notify_all();
    drain();
    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return finished_ == task_count_; });
        job_ = nullptr;
        error = error_;
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace growcut
