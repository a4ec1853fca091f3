# DCLED - Tests
