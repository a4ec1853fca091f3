# DCLED
