"""Prompt templates for every LLM-facing task in the pipeline.

Each template couples a task instruction with a bank of worked examples.
The first example of each bank is the canonical worked example for that
task; the rest are padded from a curated bank of KBQA worked examples so
that answer generation and question-type prediction run 5-shot and all
other tasks run 3-shot. Braces in example text are literal: models are
asked to wrap key outputs in ``{...}`` so downstream parsing stays cheap.

Templates can be overridden per run by pointing the template directory
option at JSON files (one per template name) with keys ``instruction``,
``query_format``, ``few_shot`` and ``slots``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .llm import PromptTemplate

SHOTS_ANSWER = 5
SHOTS_TYPE = 5
SHOTS_OTHER = 3

_TYPE_EXAMPLES = (
    (
        "Question: {Who is the coach of the team owned by Steve Bisciotti?}",
        'The type of this question is {Chain Structure}, the bridge entity is "team". '
        "We should first find the team owned by Steve Bisciotti. And then find the "
        "coach of the team.",
    ),
    (
        'Question: {Where did the "Country Nation World Tour" concert artist go to '
        "college?}",
        'The type of this question is {Chain Structure}, the bridge entity is "artist". '
        'We should first find the artist of the concert tour "Country Nation World '
        'Tour". And then find the college that the artist attended.',
    ),
    (
        "Question: {What country bordering France contains an airport that serves "
        "Nijmegen?}",
        "The type of this question is {Parallel Structure}. The question asks for the "
        "intersection of two independent sets: the countries that border France, and "
        "the countries that contain an airport that serves Nijmegen. The two "
        "conditions can be checked independently.",
    ),
    (
        "Question: {Which of the countries bordering Mexico have an army size of less "
        "than 1050?}",
        "The type of this question is {Parallel Structure}. We should first find all "
        "countries bordering Mexico, and then select those with an army size of less "
        "than 1050. The candidate set is large, so the conditions are handled as "
        "independent steps.",
    ),
    (
        "Question: {What movies does taylor lautner play in and is the film was "
        "released earliest?}",
        "The type of this question is {Parallel Structure}. We should first find all "
        "films in which Taylor Lautner appeared, and then find the one that was "
        "released the earliest.",
    ),
)

_DECOMPOSE_EXAMPLES = (
    (
        "Question: {Who is the coach of the team owned by Steve Bisciotti?}\n\n"
        "Question Type: Chain Structure",
        "Given the question type is chain structure, the sequence of the triples is "
        'important. The bridge entity is "team". We should first find the team owned '
        "by Steve Bisciotti. And then find the coach of the team.\n\n"
        "The output triples are:\n\n"
        '{"head": "Steve Bisciotti", "relation": "owns", "tail": "team#1"},\n'
        '{"head": "team#1", "relation": "is coached by", "tail": "coach#1"}',
    ),
    (
        'Question: {Where did the "Country Nation World Tour" concert artist go to '
        "college?}\n\nQuestion Type: Chain Structure",
        "Given the question type is chain structure, the sequence of the triples is "
        'important. The bridge entity is "artist". We should first find the artist of '
        'the concert tour "Country Nation World Tour". And then find the college the '
        "artist attended.\n\n"
        "The output triples are:\n\n"
        '{"head": "Country Nation World Tour", "relation": "is concert tour by", '
        '"tail": "artist#1"},\n'
        '{"head": "artist#1", "relation": "attended", "tail": "college#1"}',
    ),
    (
        "Question: {What country bordering France contains an airport that serves "
        "Nijmegen?}\n\nQuestion Type: Parallel Structure",
        "Given the question type is parallel structure, the triples are independent "
        "conditions on the same unknown entity. We should find the country that "
        "borders France, and the country that contains an airport that serves "
        "Nijmegen.\n\n"
        "The output triples are:\n\n"
        '{"head": "country#1", "relation": "borders", "tail": "France"},\n'
        '{"head": "country#1", "relation": "contains an airport that serves", '
        '"tail": "Nijmegen"}',
    ),
)

_RELATION_PRUNE_EXAMPLES = (
    (
        "Triple: {Van Andel Institute, founded in part by, American businessman#1}\n\n"
        "Relations: {1. affiliation\n"
        "2. country\n"
        "3. donations\n"
        "4. educated_at\n"
        "5. employer\n"
        "6. headquarters_location\n"
        "7. legal_form\n"
        "8. located_in_the_administrative_territorial_entity\n"
        "9. total_revenue}",
        "1. {affiliation (Score: 0.4)}: This relation is relevant because it can "
        "provide information about the individuals or organizations associated with "
        "the Van Andel Institute, including the American businessman who co-founded "
        "the Amway Corporation.\n\n"
        "2. {donations (Score: 0.3)}: This relation is relevant because it can provide "
        "information about the financial contributions made to the Van Andel "
        "Institute, which may include donations from the American businessman in "
        "question.\n\n"
        "3. {educated_at (Score: 0.3)}: This relation is relevant because it can "
        "provide information about the educational background of the American "
        "businessman, which may have influenced his involvement in founding the Van "
        "Andel Institute.",
    ),
    (
        "Triple: {Country Nation World Tour, is concert tour by, artist#1}\n\n"
        "Relations: {1. common.topic.notable_types\n"
        "2. event.held_with\n"
        "3. music.concert_tour.artist\n"
        "4. music.concert_tour.venues_visited}",
        "1. {music.concert_tour.artist (Score: 0.6)}: This relation directly links the "
        "concert tour to the artist who performed it, which is exactly the unknown of "
        "the triple.\n\n"
        "2. {event.held_with (Score: 0.4)}: This relation can connect the tour to "
        "associated people or events, which may include the artist.",
    ),
    (
        "Triple: {Rift Valley Province, is located in, nation#1}\n\n"
        "Relations: {1. location.administrative_division.country\n"
        "2. location.location.contains\n"
        "3. location.location.containedby\n"
        "4. location.location.geolocation}",
        "1. {location.administrative_division.country (Score: 0.5)}: This relation "
        "directly gives the country of the administrative division, which is the "
        "nation we need to find.\n\n"
        "2. {location.location.containedby (Score: 0.4)}: This relation gives the "
        "larger region containing the province, which is likely the nation.\n\n"
        "3. {location.location.contains (Score: 0.1)}: This relation lists places "
        "inside the province, which does not identify the nation it belongs to.",
    ),
)

_TRIPLE_PRUNE_EXAMPLES = (
    (
        "Filter Triple: {Rift Valley Province, is located in, nation#1}\n\n"
        "Triples: {1. Rift Valley Province, is located in, Kenya\n"
        "2. Kenya, location.country.currency_used, Kenyan shilling\n"
        "3. San Antonio Spurs, home venue, AT&T Center\n"
        "4. Rift Valley Province, is located in, UnName_Entity\n"
        "5. UnName_Entity, education.education.institution, Castlemont High School\n"
        "6. Rift Valley Province, location.contains, Baringo County\n"
        "7. Rift Valley Province, location.contained_by, Kenya}",
        "1. {Rift Valley Province, is located in, Kenya. (Score: 0.5)}: This triple "
        "provides significant information about Kenya's location, which relatives to "
        "the filter-triple.\n\n"
        "2. {Rift Valley Province, location.contained_by, Kenya. (Score: 0.4)}: This "
        "triple provides significant information about Kenya's location, which "
        "relatives to the filter-triple.\n\n"
        "3. {Rift Valley Province, location.contains, Baringo County. (Score: 0.1)}: "
        "This triple provides information cannot show us the location of it, so it is "
        "irrelevant.",
    ),
    (
        "Filter Triple: {Country Nation World Tour, is concert tour by, artist#1}\n\n"
        "Triples: {1. Country Nation World Tour, music.concert_tour.artist, Brad "
        "Paisley\n"
        "2. Country Nation World Tour, event.held_with, Randy Houser\n"
        "3. Country Nation World Tour, common.topic.notable_types, Concert tour}",
        "1. {Country Nation World Tour, music.concert_tour.artist, Brad Paisley. "
        "(Score: 0.7)}: This triple directly identifies the artist of the concert "
        "tour, which is the unknown of the filter-triple.\n\n"
        "2. {Country Nation World Tour, event.held_with, Randy Houser. (Score: 0.2)}: "
        "This triple links the tour to an associated performer, which is weakly "
        "relevant to the artist.\n\n"
        "3. {Country Nation World Tour, common.topic.notable_types, Concert tour. "
        "(Score: 0.1)}: This triple only states the type of the entity, so it is "
        "barely relevant.",
    ),
    (
        "Filter Triple: {Taylor Swift, plays in, movie#1}\n\n"
        "Triples: {1. UnName_Entity, film.performance.actor, Taylor Swift\n"
        "2. Taylor Swift, music.artist.genre, Country music\n"
        "3. Taylor Swift, people.person.nationality, United States of America}",
        "1. {UnName_Entity, film.performance.actor, Taylor Swift. (Score: 0.8)}: This "
        "triple connects Taylor Swift to a film performance node, which leads to the "
        "movie we need to find.\n\n"
        "2. {Taylor Swift, music.artist.genre, Country music. (Score: 0.1)}: This "
        "triple is about music genre, which does not identify a movie.\n\n"
        "3. {Taylor Swift, people.person.nationality, United States of America. "
        "(Score: 0.1)}: This triple is about nationality, which does not identify a "
        "movie.",
    ),
)

_SELECT_CHAIN_EXAMPLES = (
    (
        "Reasoning Chains: chain 1: {Country Nation World Tour, "
        "music.concert-tour.artist, Brad Paisley}, {Brad Paisley, owns, Nashville "
        "Predators}\n"
        "chain 2: {Country Nation World Tour, music.concert-tour.artist, Brad "
        "Paisley}, {Brad Paisley, attended, Belmont University}\n"
        "chain 3: {Country Nation World Tour, is hold by, Steve Bisciotti}, {Steve "
        "Bisciotti, attended, University of Alabama at Birmingham}\n\n"
        'Question: Where did the "Country Nation World Tour" concert artist go to '
        "college?",
        "The best reasoning chain is chain 2: {Country Nation World Tour, "
        "music.concert-tour.artist, Brad Paisley}, {Brad Paisley, attended, Belmont "
        'University}. It successfully finds the bridge entity "artist", which refers '
        "to Brad Paisley, the artist of the Country Nation World Tour, and then finds "
        "the college he attended: Belmont University.",
    ),
    (
        "Reasoning Chains: chain 1: {Rift Valley Province, "
        "location.administrative_division.country, Kenya}, {Kenya, "
        "location.country.currency_used, Kenyan shilling}\n"
        "chain 2: {Rift Valley Province, location.location.containedby, Kenya}, "
        "{Kenya, location.country.calling_code, 254}\n\n"
        "Question: Rift Valley Province is located in a nation that uses which form "
        "of currency?",
        "The best reasoning chain is chain 1: {Rift Valley Province, "
        "location.administrative_division.country, Kenya}, {Kenya, "
        "location.country.currency_used, Kenyan shilling}. It first finds the nation "
        "containing Rift Valley Province, which is Kenya, and then finds the currency "
        "used by Kenya: the Kenyan shilling.",
    ),
    (
        "Reasoning Chains: chain 1: {Taylor Swift Fearless 2009 Tour, "
        "music.concert-tour.artist, Taylor Swift}, {UnName_Entity, "
        "film.performance.actor, Taylor Swift}, {UnName_Entity, "
        "film.performance.film, The Lorax}\n"
        "chain 2: {Taylor Swift Fearless 2009 Tour, music.concert-tour.artist, Taylor "
        "Swift}, {Taylor Swift, music.artist.genre, Country music}\n\n"
        "Question: What movies did the artist that had the concert tour called the "
        "Taylor Swift Fears 2009 Tour play in?",
        "The best reasoning chain is chain 1: {Taylor Swift Fearless 2009 Tour, "
        "music.concert-tour.artist, Taylor Swift}, {UnName_Entity, "
        "film.performance.actor, Taylor Swift}, {UnName_Entity, "
        "film.performance.film, The Lorax}. It first finds the artist of the tour, "
        "Taylor Swift, and then finds the movie she played in: The Lorax.",
    ),
)

_ANSWER_CHAIN_EXAMPLES = (
    (
        "Question: {Rift Valley Province is located in a nation that uses which form "
        "of currency?}\n\n"
        "Question Decomposition Triples: {Rift Valley Province, is located in, "
        "nation#1}, {nation#1, uses currency, currency#1}\n\n"
        "Retrieved Reasoning Chain: {Rift Valley Province, "
        "location.administrative_division.country, Kenya}, {Kenya, "
        "location.country.currency_used, Kenyan shilling}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the nation in which Rift Valley Province is located. "
        "According to the retrieved reasoning chain, Rift Valley Province is located "
        "in Kenya.\n\n"
        "Step 2: Determine the currency used by Kenya. The retrieved reasoning chain "
        "indicates that Kenya uses the Kenyan shilling.\n\n"
        "{Kenyan shilling}",
    ),
    (
        "Question: {William Morris is religions head in which region that is part of "
        "the United Kingdom?}\n\n"
        "Question Decomposition Triples: {William Morris, is religious head in, "
        "region#1}, {region#1, is part of, United Kingdom}\n\n"
        "Retrieved Reasoning Chain: {UnName_Entity, "
        "religion.religious_organization_leadership.leader, William Morris}, "
        "{UnName_Entity, religion.religious_organization_leadership.jurisdiction, "
        "Wales}, {Wales, location.location.containedby, United Kingdom}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the region where William Morris is a religious head. "
        "According to the retrieved reasoning chain, William Morris is associated "
        "with an unnamed religious entity that has jurisdiction over Wales.\n\n"
        "Step 2: Confirm that Wales is part of the United Kingdom. The retrieved "
        "reasoning chain confirms that Wales is contained within the United "
        "Kingdom.\n\n"
        "{Wales}",
    ),
    (
        "Question: {What location that appointed Mikheil Saakashvili to governmental "
        "position is a country in Eastern Europe?}\n\n"
        "Question Decomposition Triples: {location#1, appointed to governmental "
        "position, Mikheil Saakashvili}, {location#1, is a country in, Eastern "
        "Europe}\n\n"
        "Retrieved Reasoning Chain: {UnName_Entity, "
        "government.government_position_held.appointed_by, Mikheil Saakashvili}, "
        "{UnName_Entity, government.government_position_held.jurisdiction_of_office, "
        "Georgia}, {Georgia, location.location.containedby, Eastern Europe}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the location that appointed Mikheil Saakashvili to a "
        "governmental position. According to the retrieved reasoning chain, the "
        "jurisdiction of the office held by Mikheil Saakashvili is Georgia.\n\n"
        "Step 2: Determine if Georgia is a country in Eastern Europe. According to "
        "the retrieved reasoning chain, Georgia is contained within Eastern "
        "Europe.\n\n"
        "{Georgia}",
    ),
    (
        "Question: {What movies did the artist that had the concert tour called the "
        "Taylor Swift Fears 2009 Tour play in?}\n\n"
        "Question Decomposition Triples: {Taylor Swift Fears 2009 Tour, is concert "
        "tour by, artist#1}, {artist#1, plays in, movie#1}\n\n"
        "Retrieved Reasoning Chain: {Taylor Swift Fearless 2009 Tour, "
        "music.concert-tour.artist, Taylor Swift}, {UnName_Entity, "
        "film.performance.actor, Taylor Swift}, {UnName_Entity, "
        "film.performance.film, The Lorax}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the artist who had the concert tour called the Taylor Swift "
        "Fears 2009 Tour. According to the retrieved reasoning chain, the artist is "
        "Taylor Swift.\n\n"
        "Step 2: Determine the movies Taylor Swift acted in. Based on the retrieved "
        'reasoning chain, Taylor Swift acted in "The Lorax".\n\n'
        "{The Lorax}",
    ),
    (
        "Question: {Who is the coach of the team owned by Steve Bisciotti?}\n\n"
        "Question Decomposition Triples: {Steve Bisciotti, owns, team#1}, {team#1, is "
        "coached by, coach#1}\n\n"
        "Retrieved Reasoning Chain: {Steve Bisciotti, sports.team_owner.teams_owned, "
        "Baltimore Ravens}, {Baltimore Ravens, sports.sports_team.coaches, John "
        "Harbaugh}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the team owned by Steve Bisciotti. According to the "
        "retrieved reasoning chain, Steve Bisciotti owns the Baltimore Ravens.\n\n"
        "Step 2: Determine the coach of the Baltimore Ravens. The retrieved reasoning "
        "chain indicates that the coach is John Harbaugh.\n\n"
        "{John Harbaugh}",
    ),
)

_ANSWER_PARALLEL_EXAMPLES = (
    (
        "Question: {What country bordering France contains an airport that serves "
        "Nijmegen?}\n\n"
        "Question Decomposition Triples: {country#1, borders, France}, {country#1, "
        "contains an airport that serves, Nijmegen}\n\n"
        "Retrieved Triples: {{{Belgium, borders, France}, {Germany, borders, France}, "
        "{Italy, borders, France}, {Switzerland, borders, France}}, {{Germany, "
        "contains an airport that serves, Nijmegen}, {Netherlands, contains an "
        "airport that serves, Nijmegen}}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify the country that borders France. According to the retrieved "
        "triples, the country are Belgium, Germany, Italy, and Switzerland.\n\n"
        "Step 2: Identify the country that contains an airport that serves Nijmegen. "
        "According to the retrieved triples, the country is Netherlands.\n\n"
        "Step 3: Find the intersection of the two sets, which is Germany.\n\n"
        "{Germany}",
    ),
    (
        "Question: {What is there to see in Mountain Time Zone near the Grand "
        "Canyon?}\n\n"
        "Question Decomposition Triples: {attraction#1, is in, Mountain Time Zone}, "
        "{attraction#1, is near, Grand Canyon}\n\n"
        "Retrieved Triples: {{{Colorado, location.location.time-zones, Mountain Time "
        "Zone}, {Phoenix, location.location.time-zones, Mountain Time Zone}}, "
        "{{Grand Canyon, travel.tourist-attraction.near-travel-destination, Phoenix}, "
        "{Grand Canyon, travel.tourist-attraction.near-travel-destination, Lake "
        "Powell}}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify attractions located in the Mountain Time Zone. According to "
        "the retrieved triples, locations in the Mountain Time Zone include Colorado "
        "and Phoenix.\n\n"
        "Step 2: Identify attractions near the Grand Canyon. According to the "
        "retrieved triples, attractions near the Grand Canyon include Phoenix and "
        "Lake Powell.\n\n"
        "Step 3: Find the intersection of the two sets. Phoenix is both in the "
        "Mountain Time Zone and near the Grand Canyon.\n\n"
        "{Phoenix}",
    ),
    (
        "Question: {Where with a population once of less than 5732212 is Rome, Italy "
        "located?}\n\n"
        "Question Decomposition Triples: {Rome, is located in, region#1}, {region#1, "
        "had a population once of less than, 5732212}\n\n"
        "Retrieved Triples: {{{Rome, location.location.containedby, Italy}, {Rome, "
        "location.location.containedby, Lazio}, {Rome, location.location.containedby, "
        "Province of Rome}}, {}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify where Rome, Italy is located. According to the retrieved "
        "triples, Rome is located in Italy, Lazio, and the Province of Rome.\n\n"
        "Step 2: Identify which of these locations had a population of less than "
        "5,732,212. Since the retrieved triples do not provide population data, I "
        "will rely on my own knowledge. The population of Italy is significantly "
        "higher than 5,732,212, so it does not qualify. Lazio has a population higher "
        "than 5,732,212 as well. However, the Province of Rome had a population of "
        "less than 5,732,212 at one point.\n\n"
        "Step 3: Based on this reasoning, the location with a population once less "
        "than 5,732,212 where Rome is located is the Province of Rome.\n\n"
        "{Province of Rome}",
    ),
    (
        "Question: {Which college attended by Tennessee Williams has the largest "
        "population of postgraduates?}\n\n"
        "Question Decomposition Triples: {Tennessee Williams, attended, college#1}, "
        "{college#1, has the largest population of postgraduates, number#1}\n\n"
        "Retrieved Triples: {{{UnName_Entity, education.education.student, Tennessee "
        "Williams}, {UnName_Entity, education.education.institution, Washington "
        "University in St. Louis}, {UnName_Entity, education.education.institution, "
        "University of Missouri}, {UnName_Entity, education.education.institution, "
        "University of Iowa}, {UnName_Entity, education.education.institution, The "
        "New School}}, {}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify the colleges attended by Tennessee Williams. According to "
        "the retrieved triples, Tennessee Williams attended Washington University in "
        "St. Louis, University of Missouri, University of Iowa, and The New "
        "School.\n\n"
        "Step 2: Determine the population of postgraduates for each college. Since "
        "the retrieved triples do not provide this information, I will rely on my own "
        "knowledge: the University of Iowa has the largest postgraduate population "
        "among them.\n\n"
        "Step 3: Compare the postgraduate populations of these colleges. The "
        "University of Iowa has the largest population of postgraduates.\n\n"
        "{University of Iowa}",
    ),
    (
        "Question: {William Morris is religions head in which region that is part of "
        "the United Kingdom?}\n\n"
        "Question Decomposition Triples: {William Morris, is religious head in, "
        "region#1}, {region#1, is part of, United Kingdom}\n\n"
        "Retrieved Triples: {{{William Morris, "
        "religion.religious_leader.religious_leadership, UnName_Entity}, "
        "{UnName_Entity, religion.religious_organization_leadership.jurisdiction, "
        "Wales}}, {{Wales, location.location.containedby, United Kingdom}, {England, "
        "location.location.containedby, United Kingdom}, {Northern Ireland, "
        "location.location.containedby, United Kingdom}, {Scotland, "
        "location.location.containedby, United Kingdom}}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify the region where William Morris is a religious head. Based "
        "on the retrieved triples, Wales is the region linked to religious "
        "leadership.\n\n"
        "Step 2: Identify regions that are part of the United Kingdom. Based on the "
        "retrieved triples, the United Kingdom consists of England, Scotland, Wales, "
        "and Northern Ireland.\n\n"
        "Step 3: Combine the information. Since Wales is part of the United Kingdom "
        "and is associated with religious leadership, it is the region where William "
        "Morris is likely the religious head.\n\n"
        "{Wales}",
    ),
)

_IO_EXAMPLES = (
    (
        "Question: {What state is home to the university that is represented in "
        "sports by George Washington Colonials men's basketball?}",
        "{Washington, D.C.}",
    ),
    ("Question: {What country is the Eiffel Tower located in?}", "{France}"),
    ("Question: {Who wrote the novel Pride and Prejudice?}", "{Jane Austen}"),
    ("Question: {What is the capital of Australia?}", "{Canberra}"),
    ("Question: {Which planet is known as the Red Planet?}", "{Mars}"),
)

_COT_EXAMPLES = (
    (
        "Question: {What state is home to the university that is represented in "
        "sports by George Washington Colonials men's basketball?}",
        "First, the education institution has a sports team named George Washington "
        "Colonials men's basketball in is George Washington University , Second, "
        "George Washington University is in Washington D.C. The answer is "
        "{Washington, D.C.}.",
    ),
    (
        "Question: {What country is the Eiffel Tower located in?}",
        "First, the Eiffel Tower is a landmark in Paris. Second, Paris is the capital "
        "of France. The answer is {France}.",
    ),
    (
        "Question: {Who is the author of the play Romeo and Juliet?}",
        "First, Romeo and Juliet is a famous tragedy play. Second, it was written by "
        "William Shakespeare. The answer is {William Shakespeare}.",
    ),
    (
        "Question: {What currency is used in Japan?}",
        "First, Japan is a country in East Asia. Second, the official currency of "
        "Japan is the yen. The answer is {Japanese yen}.",
    ),
    (
        "Question: {What state is the Golden Gate Bridge located in?}",
        "First, the Golden Gate Bridge is in San Francisco. Second, San Francisco is "
        "in California. The answer is {California}.",
    ),
)

_PDR_CHAIN_EXAMPLES = (
    (
        'Question: {Where did the "Country Nation World Tour" concert artist go to '
        "college?}\n\n"
        "Question Decomposition Triples: {{Country Nation World Tour, is concert tour "
        "by, artist#1}, {artist#1, attended, college#1}}",
        "Following the question decomposition triples:\n\n"
        'Step 1: Identify the artist of the "Country Nation World Tour" concert. '
        "Based on my knowledge, the artist is Brad Paisley.\n\n"
        "Step 2: Determine the college that Brad Paisley attended. Based on my "
        "knowledge, he attended Belmont University.\n\n"
        "{Belmont University}",
    ),
    (
        "Question: {Who is the coach of the team owned by Steve Bisciotti?}\n\n"
        "Question Decomposition Triples: {{Steve Bisciotti, owns, team#1}, {team#1, "
        "is coached by, coach#1}}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the team owned by Steve Bisciotti. Based on my knowledge, "
        "Steve Bisciotti owns the Baltimore Ravens.\n\n"
        "Step 2: Determine the coach of the Baltimore Ravens. Based on my knowledge, "
        "the head coach is John Harbaugh.\n\n"
        "{John Harbaugh}",
    ),
    (
        "Question: {Rift Valley Province is located in a nation that uses which form "
        "of currency?}\n\n"
        "Question Decomposition Triples: {{Rift Valley Province, is located in, "
        "nation#1}, {nation#1, uses currency, currency#1}}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the nation in which Rift Valley Province is located. Based "
        "on my knowledge, Rift Valley Province is located in Kenya.\n\n"
        "Step 2: Determine the currency used by Kenya. Based on my knowledge, Kenya "
        "uses the Kenyan shilling.\n\n"
        "{Kenyan shilling}",
    ),
    (
        "Question: {What state is home to the university that is represented in "
        "sports by George Washington Colonials men's basketball?}\n\n"
        "Question Decomposition Triples: {{George Washington Colonials men's "
        "basketball, represents, university#1}, {university#1, is located in, "
        "state#1}}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the university represented by George Washington Colonials "
        "men's basketball. Based on my knowledge, it is George Washington "
        "University.\n\n"
        "Step 2: Determine where George Washington University is located. Based on my "
        "knowledge, it is in Washington, D.C.\n\n"
        "{Washington, D.C.}",
    ),
    (
        "Question: {What movies did the artist that had the concert tour called the "
        "Taylor Swift Fears 2009 Tour play in?}\n\n"
        "Question Decomposition Triples: {{Taylor Swift Fears 2009 Tour, is concert "
        "tour by, artist#1}, {artist#1, plays in, movie#1}}",
        "Following the question decomposition triples:\n\n"
        "Step 1: Identify the artist of the Taylor Swift Fears 2009 Tour. Based on my "
        "knowledge, the artist is Taylor Swift.\n\n"
        "Step 2: Determine the movies Taylor Swift played in. Based on my knowledge, "
        'she voiced a character in "The Lorax".\n\n'
        "{The Lorax}",
    ),
)

_PDR_PARALLEL_EXAMPLES = (
    (
        "Question: {What country bordering France contains an airport that serves "
        "Nijmegen?}\n\n"
        "Question Decomposition Triples: {{country#1, borders, France}, {country#1, "
        "contains an airport that serves, Nijmegen}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify the country that borders France. Based on my own knowledge, "
        "the country are Belgium, Germany, Italy, and Switzerland.\n\n"
        "Step 2: Identify the country that contains an airport that serves Nijmegen. "
        "Based on my knowledge, the country which contains an airport that serves "
        "Nijmegen are Germany and Netherlands.\n\n"
        "Step 3: Find the intersection of the two sets, which is Germany.\n\n"
        "{Germany}",
    ),
    (
        "Question: {What is there to see in Mountain Time Zone near the Grand "
        "Canyon?}\n\n"
        "Question Decomposition Triples: {{attraction#1, is in, Mountain Time Zone}, "
        "{attraction#1, is near, Grand Canyon}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify attractions in the Mountain Time Zone. Based on my "
        "knowledge, they include Phoenix, Flagstaff, and Denver.\n\n"
        "Step 2: Identify attractions near the Grand Canyon. Based on my knowledge, "
        "they include Phoenix and Lake Powell.\n\n"
        "Step 3: Find the intersection of the two sets, which is Phoenix.\n\n"
        "{Phoenix}",
    ),
    (
        "Question: {Where with a population once of less than 5732212 is Rome, Italy "
        "located?}\n\n"
        "Question Decomposition Triples: {{Rome, is located in, region#1}, {region#1, "
        "had a population once of less than, 5732212}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify where Rome, Italy is located. Based on my knowledge, Rome "
        "is located in Italy, Lazio, and the Province of Rome.\n\n"
        "Step 2: Identify which of these locations had a population of less than "
        "5,732,212. Based on my knowledge, the Province of Rome had a population "
        "below that figure at one point.\n\n"
        "{Province of Rome}",
    ),
    (
        "Question: {Which college attended by Tennessee Williams has the largest "
        "population of postgraduates?}\n\n"
        "Question Decomposition Triples: {{Tennessee Williams, attended, college#1}, "
        "{college#1, has the largest population of postgraduates, number#1}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify the colleges attended by Tennessee Williams. Based on my "
        "knowledge, they include Washington University in St. Louis, University of "
        "Missouri, University of Iowa, and The New School.\n\n"
        "Step 2: Determine which has the largest population of postgraduates. Based "
        "on my knowledge, the University of Iowa has the largest.\n\n"
        "{University of Iowa}",
    ),
    (
        "Question: {Which of the countries bordering Mexico have an army size of "
        "less than 1050?}\n\n"
        "Question Decomposition Triples: {{country#1, borders, Mexico}, {country#1, "
        "has an army size of less than, 1050}}",
        "Following the question decomposition Triples:\n\n"
        "Step 1: Identify the countries bordering Mexico. Based on my knowledge, they "
        "are the United States, Guatemala, and Belize.\n\n"
        "Step 2: Identify which of them has an army size of less than 1050. Based on "
        "my knowledge, Belize has an army of roughly a thousand personnel.\n\n"
        "{Belize}",
    ),
)

TEMPLATES: dict[str, PromptTemplate] = {
    "question_type": PromptTemplate(
        name="question_type",
        instruction=(
            "Please analyze the following question and determine its type.\n\n"
            "Question Type:\n"
            "1. Chain Structure\n"
            "2. Parallel Structure\n\n"
            "Output the question type with \"{'{question type}'}\", and provide "
            "explanation. Do NOT format into markdown or use headers."
        ),
        query_format="Question: {question}\n\nAnswer:",
        few_shot=_TYPE_EXAMPLES,
        slots=("question",),
        expected_shots=SHOTS_TYPE,
    ),
    "decompose": PromptTemplate(
        name="decompose",
        instruction=(
            "Please first determine the reasoning process of the question. Then "
            "decompose the question into triples following the reasoning process.\n"
            "Each triple should contain concise head entity, relation, and tail "
            'entity. The entity with "#number" is what we need to find.'
        ),
        query_format="Question: {question}\n\nQuestion Type: {question_type}\n\nAnswer:",
        few_shot=_DECOMPOSE_EXAMPLES,
        slots=("question", "question_type"),
        expected_shots=SHOTS_OTHER,
    ),
    "relation_prune": PromptTemplate(
        name="relation_prune",
        instruction=(
            "Please retrieve relations that relative to the triple and rate their "
            "relative on a scale from 0 to 1 (the sum of the scores of relations is "
            "1). Do NOT format into markdown or use headers."
        ),
        query_format="triple: {triple}\n\nRelations: {relations_text}\n\nAnswer:",
        few_shot=_RELATION_PRUNE_EXAMPLES,
        slots=("triple", "relations_text"),
        expected_shots=SHOTS_OTHER,
    ),
    "triple_prune": PromptTemplate(
        name="triple_prune",
        instruction=(
            "Please identify the triples that are relevant to the given filter-triple "
            "and rate their relevance on a scale from 0 to 1 (the sum of the scores "
            "of triples is 1). Do NOT include irrelevant triples. Do NOT format into "
            "markdown or use headers. You should choose at least 1 triple from the "
            "triples."
        ),
        query_format="Filter Triple: {filter_triple}\n\nTriples: {triples_text}\n\nAnswer:",
        few_shot=_TRIPLE_PRUNE_EXAMPLES,
        slots=("filter_triple", "triples_text"),
        expected_shots=SHOTS_OTHER,
    ),
    "select_chain": PromptTemplate(
        name="select_chain",
        instruction=(
            "Please select the best reasoning chain to answer the question from the "
            "following chains:"
        ),
        query_format="Reasoning Chains: {reasoning_chains}\n\nQuestion: {question}\n\nAnswer:",
        few_shot=_SELECT_CHAIN_EXAMPLES,
        slots=("reasoning_chains", "question"),
        expected_shots=SHOTS_OTHER,
    ),
    "answer_chain": PromptTemplate(
        name="answer_chain",
        instruction=(
            "Given a question and the associated information, you are asked to answer "
            "the question using the retrieved reasoning chain and your own knowledge. "
            "Please think setep by step and follow the Question Decomposition Triples "
            "carefully. Do NOT output answer without reasoning steps. Do NOT format "
            "into markdown or use headers. At the end, output the final answer in "
            "this format: \"{'{answer}'}\""
        ),
        query_format=(
            "Question: {question}\n\n"
            "Question Decomposition Triples: {decomposition_triples}\n\n"
            "Retrieved Reasoning Chain: {reasoning_chain}\n\nAnswer:"
        ),
        few_shot=_ANSWER_CHAIN_EXAMPLES,
        slots=("question", "decomposition_triples", "reasoning_chain"),
        expected_shots=SHOTS_ANSWER,
    ),
    "answer_parallel": PromptTemplate(
        name="answer_parallel",
        instruction=(
            "Given a question and the associated information, you are asked to answer "
            "the question with these Retrieved Triples and your own knowledge. Please "
            "think setep by step and follow the Question Decomposition Triples "
            "carefully. Do NOT output answer without reasoning steps. Do NOT format "
            "into markdown or use headers. At the end, output the final answer in "
            "this format: \"{'{answer}'}\"."
        ),
        query_format=(
            "Question: {question}\n\n"
            "Question Decomposition Triples: {decomposition_triples}\n\n"
            "Retrieved Triples: {retrieved_triples}\n\nAnswer:"
        ),
        few_shot=_ANSWER_PARALLEL_EXAMPLES,
        slots=("question", "decomposition_triples", "retrieved_triples"),
        expected_shots=SHOTS_ANSWER,
    ),
    "answer_io": PromptTemplate(
        name="answer_io",
        instruction=(
            "Please answer the question, and output the answer in this format: "
            "\"{'{answer}'}\". Do NOT format into markdown or use headers"
        ),
        query_format="Question: {question}\n\nAnswer:",
        few_shot=_IO_EXAMPLES,
        slots=("question",),
        expected_shots=SHOTS_ANSWER,
    ),
    "answer_cot": PromptTemplate(
        name="answer_cot",
        instruction=(
            "Please think setep by step and answer the question. Output the answer in "
            "this format: \"{'{answer}'}\". Do NOT format into markdown or use headers"
        ),
        query_format="Question: {question}\n\nAnswer:",
        few_shot=_COT_EXAMPLES,
        slots=("question",),
        expected_shots=SHOTS_ANSWER,
    ),
    "pdr_chain": PromptTemplate(
        name="pdr_chain",
        instruction=(
            "Answer the question using the provided decomposition triples and your "
            "own knowledge. Think step by step, and strictly follow the triples. Do "
            "not skip reasoning, use markdown or headers. At the end, output the "
            "final answer as: \"{'{answer}'}\"."
        ),
        query_format=(
            "Question: {question}\n\n"
            "Question Decomposition Triples: {decomposition_triples}\n\nAnswer:"
        ),
        few_shot=_PDR_CHAIN_EXAMPLES,
        slots=("question", "decomposition_triples"),
        expected_shots=SHOTS_ANSWER,
    ),
    "pdr_parallel": PromptTemplate(
        name="pdr_parallel",
        instruction=(
            "Answer the question using the provided decomposition triples and your "
            "own knowledge. Think step by step, and strictly follow the triples. Do "
            "not skip reasoning, use markdown or headers. At the end, output the "
            "final answer as: \"{'{answer}'}\"."
        ),
        query_format=(
            "Question: {question}\n\n"
            "Question Decomposition Triples: {decomposition_triples}\n\nAnswer:"
        ),
        few_shot=_PDR_PARALLEL_EXAMPLES,
        slots=("question", "decomposition_triples"),
        expected_shots=SHOTS_ANSWER,
    ),
}


def load_templates(template_dir=None) -> dict[str, PromptTemplate]:
    """Built-in templates, optionally overridden from a directory of JSON files."""
    templates = dict(TEMPLATES)
    if template_dir is None:
        return templates
    for path in sorted(Path(template_dir).glob("*.json")):
        obj = json.loads(path.read_text(encoding="utf-8"))
        name = path.stem
        base = templates.get(name)
        templates[name] = PromptTemplate(
            name=name,
            instruction=obj["instruction"],
            query_format=obj["query_format"],
            few_shot=tuple((i, o) for i, o in obj["few_shot"]),
            slots=tuple(obj["slots"]),
            expected_shots=obj.get(
                "expected_shots",
                len(obj["few_shot"]) if base is None else base.expected_shots),
        )
    return templates
