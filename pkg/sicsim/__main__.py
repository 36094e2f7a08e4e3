from sicsim.run import main

raise SystemExit(main())
