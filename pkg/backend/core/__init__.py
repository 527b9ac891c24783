# Core numerics and errors
