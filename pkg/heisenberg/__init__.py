# Heisenberg heat kernel package
