# Validators package: estimate checks, identity fuzzing and the monitor
