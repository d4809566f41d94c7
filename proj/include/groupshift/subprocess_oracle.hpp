#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <mutex>
#include <string>
#include <vector>

#include "groupshift/errors.hpp"

namespace groupshift {

/// Client side of the line-oriented word-problem protocol: the child reads one
/// word per line (space-separated generator names) on stdin and answers with a
/// line containing "1" (identity) or "0". The child is spawned lazily and kept
/// alive for the lifetime of this object.
class SubprocessWordProblem {
public:
    explicit SubprocessWordProblem(std::vector<std::string> command)
        : command_(std::move(command)) {}

    ~SubprocessWordProblem() { shutdown(); }

    SubprocessWordProblem(const SubprocessWordProblem&) = delete;
    SubprocessWordProblem& operator=(const SubprocessWordProblem&) = delete;

    bool query(const std::string& word_line) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!running_) spawn();
        std::string line = word_line;
        line.push_back('\n');
        if (fputs(line.c_str(), to_child_) == EOF || fflush(to_child_) != 0) {
            throw error("subprocess oracle: write failed");
        }
        char buf[64];
        if (!fgets(buf, sizeof buf, from_child_)) {
            throw error("subprocess oracle: child closed the stream");
        }
        if (buf[0] == '1') return true;
        if (buf[0] == '0') return false;
        throw error(std::string("subprocess oracle: unexpected reply \"") + buf + "\"");
    }

private:
    void spawn() {
        int to_pipe[2];
        int from_pipe[2];
        if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0) {
            throw error("subprocess oracle: pipe() failed");
        }
        pid_t pid = fork();
        if (pid < 0) throw error("subprocess oracle: fork() failed");
        if (pid == 0) {
            dup2(to_pipe[0], STDIN_FILENO);
            dup2(from_pipe[1], STDOUT_FILENO);
            close(to_pipe[0]);
            close(to_pipe[1]);
            close(from_pipe[0]);
            close(from_pipe[1]);
            std::vector<char*> argv;
            argv.reserve(command_.size() + 1);
            for (auto& arg : command_) argv.push_back(const_cast<char*>(arg.c_str()));
            argv.push_back(nullptr);
            execvp(argv[0], argv.data());
            _exit(127);
        }
        close(to_pipe[0]);
        close(from_pipe[1]);
        to_child_ = fdopen(to_pipe[1], "w");
        from_child_ = fdopen(from_pipe[0], "r");
        if (!to_child_ || !from_child_) throw error("subprocess oracle: fdopen failed");
        pid_ = pid;
        running_ = true;
    }

    void shutdown() {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!running_) return;
        fclose(to_child_);
        fclose(from_child_);
        int status = 0;
        waitpid(pid_, &status, 0);
        running_ = false;
    }

    std::vector<std::string> command_;
    std::mutex mutex_;
    bool running_ = false;
    pid_t pid_ = -1;
    FILE* to_child_ = nullptr;
    FILE* from_child_ = nullptr;
};

} // namespace groupshift
